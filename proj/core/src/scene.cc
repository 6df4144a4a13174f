/* Copyright 2026 The Radcam Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "radcam/scene.h"

#include <string>

namespace radcam {

std::string_view ClassName(ObjectClass c) {
  switch (c) {
    case ObjectClass::kCar:
      return "car";
    case ObjectClass::kPedestrian:
      return "pedestrian";
    case ObjectClass::kCycle:
      return "cycle";
  }
  throw DataError("unknown object class " + std::to_string(static_cast<int>(c)));
}

ObjectClass ClassFromName(std::string_view name) {
  for (int i = 0; i < kNumClasses; ++i) {
    const auto c = static_cast<ObjectClass>(i);
    if (ClassName(c) == name) return c;
  }
  throw DataError("unknown object class '" + std::string(name) + "'");
}

}  // namespace radcam

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

#include "radcam/io.h"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace radcam {
namespace {

using nlohmann::json;

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

json VecJson(const auto& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

template <int N>
Eigen::Matrix<double, N, 1> JsonVec(const json& j, const char* what) {
  if (!j.is_array() || j.size() != N) {
    throw DataError(std::string(what) + " must be an array of " + std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) out[i] = j[i].get<double>();
  return out;
}

json TransformJson(const RigidTransform& t) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(t.rotation(r, c));
  }
  return {{"rotation", rot}, {"translation", VecJson(t.translation)}};
}

RigidTransform JsonTransform(const json& j) {
  RigidTransform t;
  const json& rot = j.at("rotation");
  if (!rot.is_array() || rot.size() != 9) throw DataError("rotation must have 9 entries");
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) t.rotation(r, c) = rot[3 * r + c].get<double>();
  }
  t.translation = JsonVec<3>(j.at("translation"), "translation");
  return t;
}

json BoxJson(const Box3d& b) {
  return {{"center", VecJson(b.center)},
          {"size", VecJson(b.size)},
          {"yaw", b.yaw},
          {"velocity", VecJson(b.velocity)},
          {"class", std::string(ClassName(b.label))}};
}

Box3d JsonBox(const json& j) {
  Box3d b;
  b.center = JsonVec<3>(j.at("center"), "center");
  b.size = JsonVec<3>(j.at("size"), "size");
  b.yaw = j.at("yaw").get<double>();
  b.velocity = JsonVec<2>(j.at("velocity"), "velocity");
  b.label = ClassFromName(j.at("class").get<std::string>());
  return b;
}

json RasterJson(const Tensor& t) {
  std::vector<unsigned char> bytes(t.size() * 4);
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(t[i]));
    for (int b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  return {{"shape", t.shape()}, {"dtype", "f32le"}, {"data", Base64Encode(bytes)}};
}

Tensor JsonRaster(const json& j) {
  if (j.at("dtype").get<std::string>() != "f32le") throw DataError("raster dtype must be f32le");
  const Shape shape = j.at("shape").get<Shape>();
  const auto bytes = Base64Decode(j.at("data").get<std::string>());
  const std::size_t n = NumElements(shape);
  if (bytes.size() != 4 * n) {
    throw DataError("raster " + ShapeString(shape) + " needs " + std::to_string(4 * n) +
                    " bytes, got " + std::to_string(bytes.size()));
  }
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
    values[i] = std::bit_cast<float>(bits);
  }
  return Tensor(shape, std::move(values));
}

json DetectionJson(const Detection& d) {
  json j = BoxJson(d.box);
  j["score"] = d.score;
  return j;
}

template <typename Fn>
auto Parse(std::string_view what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw DataError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string Base64Encode(std::span<const unsigned char> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest > 0) {
    std::uint32_t v = bytes[i] << 16;
    if (rest == 2) v |= bytes[i + 1] << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<unsigned char> Base64Decode(std::string_view text) {
  if (text.size() % 4 != 0) throw DataError("base64 length is not a multiple of 4");
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    throw DataError(std::string("invalid base64 character '") + c + "'");
  };
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool last = i + 4 == text.size();
    const int pad = last ? (text[i + 3] == '=') + (text[i + 2] == '=') : 0;
    if (pad == 1 && text[i + 2] == '=') throw DataError("malformed base64 padding");
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v = (v << 6) | (k >= 4 - pad ? 0 : value(text[i + k]));
    out.push_back(static_cast<unsigned char>(v >> 16));
    if (pad < 2) out.push_back(static_cast<unsigned char>(v >> 8));
    if (pad < 1) out.push_back(static_cast<unsigned char>(v));
  }
  return out;
}

std::string SceneToJson(const SceneRecord& scene) {
  json j;
  j["scene_id"] = scene.scene_id;
  j["seed"] = scene.seed;
  j["current_time"] = scene.current_time;
  j["gt"] = json::array();
  for (const Box3d& b : scene.gt) j["gt"].push_back(BoxJson(b));
  j["sweeps"] = json::array();
  for (const RadarSweep& s : scene.sweeps) {
    json pts = json::array();
    for (const RadarPoint& p : s.points) {
      pts.push_back({{"position", VecJson(p.position)},
                     {"rcs", p.rcs},
                     {"velocity", VecJson(p.velocity)}});
    }
    j["sweeps"].push_back(
        {{"timestamp", s.timestamp}, {"ego_pose", TransformJson(s.ego_pose)}, {"points", pts}});
  }
  j["cameras"] = json::array();
  for (const CameraModel& c : scene.cameras) {
    json k = json::array();
    for (int r = 0; r < 3; ++r) {
      for (int col = 0; col < 3; ++col) k.push_back(c.intrinsics(r, col));
    }
    j["cameras"].push_back({{"intrinsics", k},
                            {"ego_to_camera", TransformJson(c.ego_to_camera)},
                            {"image_width", c.image_width},
                            {"image_height", c.image_height},
                            {"feature_scale", c.feature_scale}});
  }
  j["features"] = json::array();
  for (const auto& levels : scene.features) {
    json pyramid = json::array();
    for (const Tensor& t : levels) pyramid.push_back(RasterJson(t));
    j["features"].push_back(pyramid);
  }
  return j.dump();
}

SceneRecord SceneFromJson(std::string_view text) {
  return Parse("scene json", [&] {
    const json j = json::parse(text);
    SceneRecord scene;
    scene.scene_id = j.at("scene_id").get<std::string>();
    scene.seed = j.at("seed").get<std::uint64_t>();
    scene.current_time = j.value("current_time", 0.0);
    for (const json& b : j.at("gt")) scene.gt.push_back(JsonBox(b));
    for (const json& s : j.at("sweeps")) {
      RadarSweep sweep;
      sweep.timestamp = s.at("timestamp").get<double>();
      sweep.ego_pose = JsonTransform(s.at("ego_pose"));
      for (const json& p : s.at("points")) {
        RadarPoint point;
        point.position = JsonVec<3>(p.at("position"), "position");
        point.rcs = p.at("rcs").get<double>();
        point.velocity = JsonVec<2>(p.at("velocity"), "velocity");
        sweep.points.push_back(point);
      }
      scene.sweeps.push_back(std::move(sweep));
    }
    for (const json& c : j.at("cameras")) {
      CameraModel cam;
      const json& k = c.at("intrinsics");
      if (!k.is_array() || k.size() != 9) throw DataError("intrinsics must have 9 entries");
      for (int r = 0; r < 3; ++r) {
        for (int col = 0; col < 3; ++col) cam.intrinsics(r, col) = k[3 * r + col].get<double>();
      }
      cam.ego_to_camera = JsonTransform(c.at("ego_to_camera"));
      cam.image_width = c.at("image_width").get<int>();
      cam.image_height = c.at("image_height").get<int>();
      cam.feature_scale = c.at("feature_scale").get<std::vector<double>>();
      scene.cameras.push_back(std::move(cam));
    }
    for (const json& pyramid : j.at("features")) {
      std::vector<Tensor> levels;
      for (const json& r : pyramid) levels.push_back(JsonRaster(r));
      scene.features.push_back(std::move(levels));
    }
    return scene;
  });
}

std::string DetectionsToJson(std::span<const SceneDetections> dets) {
  json j = json::object();
  for (const SceneDetections& s : dets) {
    json list = json::array();
    for (const Detection& d : s.detections) list.push_back(DetectionJson(d));
    j[s.scene_id] = list;
  }
  return j.dump(1);
}

std::vector<SceneDetections> DetectionsFromJson(std::string_view text) {
  return Parse("detections json", [&] {
    const json j = json::parse(text);
    if (!j.is_object()) throw DataError("detections json must map scene ids to lists");
    std::vector<SceneDetections> out;
    for (const auto& [id, list] : j.items()) {
      SceneDetections s;
      s.scene_id = id;
      for (const json& d : list) {
        s.detections.push_back(Detection{JsonBox(d), d.at("score").get<double>()});
      }
      out.push_back(std::move(s));
    }
    return out;
  });
}

std::string MetricsToJson(const Metrics& m) {
  auto errors = [](const TpErrors& e) {
    return json{{"ate", e.translation}, {"ase", e.scale}, {"aoe", e.orientation},
                {"ave", e.velocity}, {"num_tp", e.num_tp}};
  };
  json j;
  j["mAP"] = m.map;
  j["NDS"] = m.nds;
  j["errors"] = errors(m.errors);
  for (int c = 0; c < kNumClasses; ++c) {
    const ClassMetrics& cm = m.classes[c];
    json ap;
    for (std::size_t t = 0; t < kMatchThresholds.size(); ++t) {
      char key[16];
      std::snprintf(key, sizeof(key), "%.1f", kMatchThresholds[t]);
      ap[key] = cm.ap[t];
    }
    j["classes"][std::string(ClassName(static_cast<ObjectClass>(c)))] = {
        {"ap", ap}, {"mean_ap", cm.mean_ap}, {"errors", errors(cm.errors)},
        {"num_gt", cm.num_gt}, {"num_det", cm.num_det}};
  }
  return j.dump(1);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw DataError("short write to " + path.string());
}

std::vector<std::filesystem::path> ListSceneFiles(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw DataError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto& p = e.path();
    if (e.is_regular_file() && p.extension() == ".json" && p.filename() != "manifest.json") {
      out.push_back(p);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

SceneRecord ReadScene(const std::filesystem::path& path) {
  try {
    return SceneFromJson(ReadFile(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace radcam

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

#ifndef RADCAM_TENSOR_H_
#define RADCAM_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "radcam/errors.h"

namespace radcam {

using Shape = std::vector<int>;

std::size_t NumElements(const Shape& shape);
std::string ShapeString(const Shape& shape);

// Dense row-major fp64 array. Every dimension is positive; a rank-0 shape
// holds a single scalar.
class Tensor {
 public:
  Tensor() : data_(1, 0.0) {}
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor Zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor Full(Shape shape, double value);
  static Tensor Scalar(double value) { return Tensor({}, {value}); }
  static Tensor Vector(std::initializer_list<double> values);
  static Tensor Matrix(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int axis) const;
  std::size_t size() const { return data_.size(); }

  std::span<const double> data() const { return data_; }
  std::span<double> mutable_data() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double at(int i, int j) const { return data_[Offset2(i, j)]; }
  double& at(int i, int j) { return data_[Offset2(i, j)]; }
  double at(int i, int j, int k) const { return data_[Offset3(i, j, k)]; }
  double& at(int i, int j, int k) { return data_[Offset3(i, j, k)]; }

  // Same data, new shape with equal element count.
  Tensor Reshaped(Shape shape) const;

  // Rows of the tensor when viewed as [leading x last-axis].
  int Rows() const;
  int Cols() const;

  bool AllFinite() const;

 private:
  std::size_t Offset2(int i, int j) const {
    return static_cast<std::size_t>(i) * shape_[1] + j;
  }
  std::size_t Offset3(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k;
  }

  Shape shape_;
  std::vector<double> data_;
};

// Throws NumericError naming `where` when any value is NaN or infinite.
void CheckFinite(const Tensor& t, const std::string& where);

}  // namespace radcam

#endif  // RADCAM_TENSOR_H_

// Copyright 2026 The Viewspan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace viewspan {

/// Row-major 2D array of per-pixel values.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int height, int width, const T& fill = T{})
      : height_(height),
        width_(width),
        values_(static_cast<std::size_t>(height) * width, fill) {}

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }

  T& operator()(int row, int col) { return values_[index(row, col)]; }
  const T& operator()(int row, int col) const {
    return values_[index(row, col)];
  }
  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  template <typename U>
  bool same_dims(const Grid<U>& other) const {
    return height_ == other.height() && width_ == other.width();
  }

  bool operator==(const Grid& other) const = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<T> values_;
};

using Mask = Grid<std::uint8_t>;

}  // namespace viewspan

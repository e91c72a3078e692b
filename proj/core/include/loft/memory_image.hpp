//===- memory_image.hpp - Named int32 memory contents ------------*- C++ -*-===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// A MemoryImage is the unit of data exchanged across the whole pipeline: the
// interpreter consumes and produces them, the hardware simulator preloads
// memories from them, and the CLI reads/writes them as JSON:
//
//   {"name": "arg0", "length": 16, "data": [0, -3, ...]}
//
// `data` must have exactly `length` entries of signed 32-bit integers.
//
//===----------------------------------------------------------------------===//

#ifndef LOFT_MEMORY_IMAGE_HPP
#define LOFT_MEMORY_IMAGE_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace loft {

struct MemoryImage {
  std::string name;
  std::vector<int32_t> data;

  bool operator==(const MemoryImage &) const = default;
};

/// Parse one image from JSON text. Throws std::runtime_error on malformed
/// input or when `length` disagrees with the data array.
MemoryImage memory_image_from_json(const std::string &text);

std::string memory_image_to_json(const MemoryImage &image);

/// Serialize a whole image set as a JSON array, in the given order.
std::string memory_images_to_json(const std::vector<MemoryImage> &images);

/// Find by name; returns nullptr when absent.
const MemoryImage *find_image(const std::vector<MemoryImage> &images,
                              const std::string &name);

} // namespace loft

#endif // LOFT_MEMORY_IMAGE_HPP

//===- memory_image.cpp - MemoryImage JSON serialization ----------*- C++ -*-===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "loft/memory_image.hpp"

#include <nlohmann/json.hpp>

#include <sstream>
#include <stdexcept>

namespace loft {

using nlohmann::json;

namespace {

MemoryImage image_from_value(const json &j) {
  if (!j.is_object())
    throw std::runtime_error("memory image: expected a JSON object");
  if (!j.contains("name") || !j["name"].is_string())
    throw std::runtime_error("memory image: missing string field \"name\"");
  if (!j.contains("length") || !j["length"].is_number_integer())
    throw std::runtime_error("memory image: missing integer field \"length\"");
  if (!j.contains("data") || !j["data"].is_array())
    throw std::runtime_error("memory image: missing array field \"data\"");

  MemoryImage img;
  img.name = j["name"].get<std::string>();
  int64_t length = j["length"].get<int64_t>();
  img.data.reserve(j["data"].size());
  for (const auto &v : j["data"]) {
    if (!v.is_number_integer())
      throw std::runtime_error("memory image: data entries must be integers");
    int64_t raw = v.get<int64_t>();
    if (raw < INT32_MIN || raw > INT32_MAX)
      throw std::runtime_error("memory image: data entry " +
                               std::to_string(raw) + " does not fit in i32");
    img.data.push_back(static_cast<int32_t>(raw));
  }
  if (static_cast<int64_t>(img.data.size()) != length)
    throw std::runtime_error("memory image \"" + img.name + "\": length " +
                             std::to_string(length) + " disagrees with " +
                             std::to_string(img.data.size()) +
                             " data entries");
  return img;
}

json image_to_value(const MemoryImage &img) {
  json j;
  j["name"] = img.name;
  j["length"] = img.data.size();
  j["data"] = img.data;
  return j;
}

} // namespace

MemoryImage memory_image_from_json(const std::string &text) {
  json value = json::parse(text, /*cb=*/nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded())
    throw std::runtime_error("memory image: not valid JSON");
  return image_from_value(value);
}

std::string memory_image_to_json(const MemoryImage &image) {
  return image_to_value(image).dump();
}

std::string memory_images_to_json(const std::vector<MemoryImage> &images) {
  json arr = json::array();
  for (const auto &img : images)
    arr.push_back(image_to_value(img));
  return arr.dump(2);
}

const MemoryImage *find_image(const std::vector<MemoryImage> &images,
                              const std::string &name) {
  for (const auto &img : images)
    if (img.name == name)
      return &img;
  return nullptr;
}

} // namespace loft

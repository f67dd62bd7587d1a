#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "boxfix/annotation.hpp"

namespace boxfix::io {

using json = nlohmann::json;

struct ImageRecord {
  std::int64_t id = 0;
  std::optional<std::int64_t> width;
  std::optional<std::int64_t> height;
  std::optional<std::string> file_name;
  json extra = json::object();  // fields this tool does not interpret
};

struct CategoryRecord {
  std::int64_t id = 0;
  std::optional<std::string> name;
  json extra = json::object();
};

struct AnnotationRecord {
  Instance instance;
  /// The bbox array as read; written back untouched while the box is unchanged.
  json source_bbox;
  json extra = json::object();
};

/// COCO annotation file. Unknown fields at every level survive a load/save
/// round trip.
struct DatasetFile {
  std::vector<ImageRecord> images;
  std::vector<AnnotationRecord> annotations;
  std::vector<CategoryRecord> categories;
  json extra = json::object();

  std::vector<Instance> instances() const;
  /// Replaces annotation boxes from `updated`, matched by position and
  /// checked by id. Only boxes change.
  void set_boxes(std::span<const Instance> updated);
  const ImageRecord* find_image(std::int64_t id) const;
};

/// Parses and validates a dataset document. Errors carry a JSON path
/// (e.g. "/annotations/3/bbox"); dangling image/category references are fatal.
DatasetFile parse_dataset(const json& doc);
json dataset_to_json(const DatasetFile& dataset);

DatasetFile load_dataset(const std::filesystem::path& path);
/// Canonical form: sorted keys, two-space indent, trailing newline.
void save_dataset(const DatasetFile& dataset, const std::filesystem::path& path);

/// COCO results list: [{image_id, category_id, bbox: [x, y, w, h], score}].
std::vector<Prediction> parse_results(const json& doc);
json results_to_json(std::span<const Prediction> predictions);
std::vector<Prediction> load_results(const std::filesystem::path& path);
void save_results(std::span<const Prediction> predictions, const std::filesystem::path& path);

json read_json(const std::filesystem::path& path);
std::string canonical_dump(const json& doc);
/// Writes via a temporary file in the same directory and renames over `path`.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
inline void write_json(const std::filesystem::path& path, const json& doc) {
  write_text_atomic(path, canonical_dump(doc));
}

}  // namespace boxfix::io

#include "boxfix/io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <unistd.h>

#include "boxfix/error.hpp"

namespace boxfix::io {

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kSchema, (path.empty() ? std::string("/") : path) + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(path, std::string("missing required field '") + key + "'");
  return *it;
}

std::int64_t as_int(const json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == static_cast<double>(static_cast<std::int64_t>(d))) return static_cast<std::int64_t>(d);
  }
  schema_error(path, "expected an integer");
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  return v.get<double>();
}

XYWH parse_bbox(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 4) schema_error(path, "expected [x, y, w, h]");
  XYWH b{as_number(v[0], path + "/0"), as_number(v[1], path + "/1"), as_number(v[2], path + "/2"),
         as_number(v[3], path + "/3")};
  if (!(b.w >= 0.0) || !(b.h >= 0.0)) schema_error(path, "box width and height must be >= 0");
  return b;
}

json without(const json& obj, std::initializer_list<const char*> keys) {
  json out = obj;
  for (const char* k : keys) out.erase(k);
  return out;
}

json bbox_json(const BBox& box) {
  const XYWH v = to_xywh(box);
  return json::array({v.x, v.y, v.w, v.h});
}

}  // namespace

std::vector<Instance> DatasetFile::instances() const {
  std::vector<Instance> out;
  out.reserve(annotations.size());
  for (const auto& a : annotations) out.push_back(a.instance);
  return out;
}

void DatasetFile::set_boxes(std::span<const Instance> updated) {
  if (updated.size() != annotations.size()) {
    throw Error(ErrorCode::kInvalidArgument, "annotation count changed");
  }
  for (std::size_t i = 0; i < updated.size(); ++i) {
    if (updated[i].id != annotations[i].instance.id) {
      std::ostringstream os;
      os << "annotation order changed at position " << i;
      throw Error(ErrorCode::kInvalidArgument, os.str());
    }
    annotations[i].instance.box = updated[i].box;
  }
}

const ImageRecord* DatasetFile::find_image(std::int64_t id) const {
  for (const auto& img : images) {
    if (img.id == id) return &img;
  }
  return nullptr;
}

DatasetFile parse_dataset(const json& doc) {
  if (!doc.is_object()) schema_error("", "expected a JSON object");
  DatasetFile ds;
  ds.extra = without(doc, {"images", "annotations", "categories"});

  std::set<std::int64_t> image_ids;
  if (const auto it = doc.find("images"); it != doc.end()) {
    if (!it->is_array()) schema_error("/images", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& e = (*it)[i];
      const std::string path = "/images/" + std::to_string(i);
      if (!e.is_object()) schema_error(path, "expected an object");
      ImageRecord img;
      img.id = as_int(require(e, "id", path), path + "/id");
      if (e.contains("width")) img.width = as_int(e["width"], path + "/width");
      if (e.contains("height")) img.height = as_int(e["height"], path + "/height");
      if (e.contains("file_name")) {
        if (!e["file_name"].is_string()) schema_error(path + "/file_name", "expected a string");
        img.file_name = e["file_name"].get<std::string>();
      }
      img.extra = without(e, {"id", "width", "height", "file_name"});
      if (!image_ids.insert(img.id).second) schema_error(path + "/id", "duplicate image id");
      ds.images.push_back(std::move(img));
    }
  }

  std::set<std::int64_t> category_ids;
  if (const auto it = doc.find("categories"); it != doc.end()) {
    if (!it->is_array()) schema_error("/categories", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& e = (*it)[i];
      const std::string path = "/categories/" + std::to_string(i);
      if (!e.is_object()) schema_error(path, "expected an object");
      CategoryRecord cat;
      cat.id = as_int(require(e, "id", path), path + "/id");
      if (e.contains("name")) {
        if (!e["name"].is_string()) schema_error(path + "/name", "expected a string");
        cat.name = e["name"].get<std::string>();
      }
      cat.extra = without(e, {"id", "name"});
      if (!category_ids.insert(cat.id).second) schema_error(path + "/id", "duplicate category id");
      ds.categories.push_back(std::move(cat));
    }
  }

  std::unordered_set<std::int64_t> annotation_ids;
  if (const auto it = doc.find("annotations"); it != doc.end()) {
    if (!it->is_array()) schema_error("/annotations", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& e = (*it)[i];
      const std::string path = "/annotations/" + std::to_string(i);
      if (!e.is_object()) schema_error(path, "expected an object");
      AnnotationRecord rec;
      Instance& inst = rec.instance;
      inst.id = as_int(require(e, "id", path), path + "/id");
      inst.image_id = as_int(require(e, "image_id", path), path + "/image_id");
      inst.category_id = as_int(require(e, "category_id", path), path + "/category_id");
      rec.source_bbox = require(e, "bbox", path);
      const XYWH b = parse_bbox(rec.source_bbox, path + "/bbox");
      try {
        inst.box = from_xywh(b);
      } catch (const Error& err) {
        schema_error(path + "/bbox", err.what());
      }
      if (e.contains("iscrowd")) {
        const json& c = e["iscrowd"];
        if (c.is_boolean()) {
          inst.iscrowd = c.get<bool>();
        } else {
          inst.iscrowd = as_int(c, path + "/iscrowd") != 0;
        }
      }
      rec.extra = without(e, {"id", "image_id", "category_id", "bbox", "iscrowd"});
      if (e.contains("iscrowd")) rec.extra["iscrowd"] = e["iscrowd"];

      if (!annotation_ids.insert(inst.id).second) {
        schema_error(path + "/id", "duplicate annotation id " + std::to_string(inst.id));
      }
      if (!image_ids.contains(inst.image_id)) {
        throw Error(ErrorCode::kReference, "annotation " + std::to_string(inst.id) + " (" + path +
                                               ") references unknown image_id " +
                                               std::to_string(inst.image_id));
      }
      if (!category_ids.contains(inst.category_id)) {
        throw Error(ErrorCode::kReference, "annotation " + std::to_string(inst.id) + " (" + path +
                                               ") references unknown category_id " +
                                               std::to_string(inst.category_id));
      }
      ds.annotations.push_back(std::move(rec));
    }
  }
  return ds;
}

json dataset_to_json(const DatasetFile& ds) {
  json doc = ds.extra;
  json images = json::array();
  for (const auto& img : ds.images) {
    json e = img.extra;
    e["id"] = img.id;
    if (img.width) e["width"] = *img.width;
    if (img.height) e["height"] = *img.height;
    if (img.file_name) e["file_name"] = *img.file_name;
    images.push_back(std::move(e));
  }
  json categories = json::array();
  for (const auto& cat : ds.categories) {
    json e = cat.extra;
    e["id"] = cat.id;
    if (cat.name) e["name"] = *cat.name;
    categories.push_back(std::move(e));
  }
  json annotations = json::array();
  for (const auto& rec : ds.annotations) {
    json e = rec.extra;
    const Instance& inst = rec.instance;
    e["id"] = inst.id;
    e["image_id"] = inst.image_id;
    e["category_id"] = inst.category_id;
    bool unchanged = false;
    if (!rec.source_bbox.is_null()) {
      const XYWH src = parse_bbox(rec.source_bbox, "/bbox");
      unchanged = from_xywh(src) == inst.box;
    }
    e["bbox"] = unchanged ? rec.source_bbox : bbox_json(inst.box);
    if (!e.contains("iscrowd") && inst.iscrowd) e["iscrowd"] = 1;
    annotations.push_back(std::move(e));
  }
  doc["images"] = std::move(images);
  doc["annotations"] = std::move(annotations);
  doc["categories"] = std::move(categories);
  return doc;
}

std::string canonical_dump(const json& doc) { return doc.dump(2) + "\n"; }

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchema, path.string() + ": invalid JSON: " + e.what());
  }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot move output into place at " + path.string());
  }
}

DatasetFile load_dataset(const std::filesystem::path& path) {
  const json doc = read_json(path);
  try {
    return parse_dataset(doc);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_dataset(const DatasetFile& dataset, const std::filesystem::path& path) {
  write_json(path, dataset_to_json(dataset));
}

std::vector<Prediction> parse_results(const json& doc) {
  if (!doc.is_array()) schema_error("", "expected a JSON array of results");
  std::vector<Prediction> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& e = doc[i];
    const std::string path = "/" + std::to_string(i);
    if (!e.is_object()) schema_error(path, "expected an object");
    const auto image_id = as_int(require(e, "image_id", path), path + "/image_id");
    const auto category_id = as_int(require(e, "category_id", path), path + "/category_id");
    const XYWH b = parse_bbox(require(e, "bbox", path), path + "/bbox");
    const double score = as_number(require(e, "score", path), path + "/score");
    if (!(score >= 0.0 && score <= 1.0)) {
      std::ostringstream os;
      os << path << "/score: score " << score << " outside [0, 1]";
      throw Error(ErrorCode::kRange, os.str());
    }
    out.emplace_back(image_id, from_xywh(b), category_id, score);
  }
  return out;
}

json results_to_json(std::span<const Prediction> predictions) {
  json out = json::array();
  for (const Prediction& p : predictions) {
    for (const CategoryScore& s : p.scores) {
      out.push_back({{"image_id", p.image_id},
                     {"category_id", s.category_id},
                     {"bbox", bbox_json(p.box)},
                     {"score", s.score}});
    }
  }
  return out;
}

std::vector<Prediction> load_results(const std::filesystem::path& path) {
  const json doc = read_json(path);
  try {
    return parse_results(doc);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_results(std::span<const Prediction> predictions, const std::filesystem::path& path) {
  write_json(path, results_to_json(predictions));
}

}  // namespace boxfix::io

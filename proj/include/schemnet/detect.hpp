#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "schemnet/raster.hpp"
#include "schemnet/types.hpp"

namespace schemnet {

class SymbolLibrary;

class IngestError : public std::runtime_error {
 public:
  IngestError(const std::string& path, const std::string& msg)
      : std::runtime_error(path + ": " + msg), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct ImageDims {
  int width = 0;
  int height = 0;
};

/// Parses a detection interchange document. Components come back sorted by
/// (y, x, original index) with dense ids. Boxes up to 2 px outside the image
/// are clamped and reported through `warnings`.
std::vector<Component> ingest_detections(std::string_view json_text, ImageDims dims,
                                         std::vector<std::string>* warnings = nullptr);
std::string serialize_detections(const std::vector<Component>& comps, ImageDims dims);

struct TypeCount {
  ComponentType ctype;
  int count_a = 0;
  int count_b = 0;
};

struct ConcordanceReport {
  double score = 1.0;
  std::vector<TypeCount> per_type;
  std::vector<Flag> flags;
};

ConcordanceReport verify_concordance(const std::vector<Component>& a, const std::vector<Component>& b);
ConcordanceReport verify_counts(const std::vector<TypeCount>& counts);

struct TemplateOptions {
  double min_ink_fraction = 0.97;
};

/// Exact-scale template matching against the symbol library.
std::vector<Component> detect_template(const BinaryImage& img, const SymbolLibrary& library,
                                       const TemplateOptions& opts = {});

}  // namespace schemnet

#pragma once

#include <vector>

#include "schemnet/raster.hpp"
#include "schemnet/types.hpp"

namespace schemnet {

struct Segment {
  Point a;
  Point b;
};

// Rasterizes a centerline with a square brush of side 2*half_width+1.
void draw_stroke(BinaryImage& img, Point a, Point b, int half_width = 1);

struct SymbolTemplate {
  ComponentType ctype;
  int orientation = 0;            // quarter turns clockwise
  std::vector<Segment> strokes;   // symbol-local coordinates, ink bbox at origin
  BinaryImage mask;
  std::vector<Terminal> terminals;  // anchors relative to the mask origin, on its perimeter
  std::vector<Point> ink;         // ink offsets; ink.front() is the first pixel in row-major order
};

/// Symbol shapes shared by the renderer and the template detector.
/// Orientations whose mask duplicates a lower orientation are dropped.
class SymbolLibrary {
 public:
  static const SymbolLibrary& standard();

  const std::vector<SymbolTemplate>& templates() const { return templates_; }
  const SymbolTemplate& get(ComponentType t, int orientation) const;
  std::vector<int> orientations(ComponentType t) const;

 private:
  SymbolLibrary();
  std::vector<SymbolTemplate> templates_;
};

}  // namespace schemnet

#pragma once

#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "itl/diffcore/tensor.hpp"

namespace itl {

/// The four room attribute sets, in concatenation order.
enum class AttributeSet { basic = 1, distance = 2, shape = 3, image = 4 };

inline const char* attribute_set_name(AttributeSet s) {
  switch (s) {
    case AttributeSet::basic: return "basic";
    case AttributeSet::distance: return "distance";
    case AttributeSet::shape: return "shape";
    case AttributeSet::image: return "image";
  }
  return "?";
}

/// Which attribute sets are enabled; parsed from strings such as "1,2,3".
struct AttributeSelection {
  std::array<bool, 4> enabled{true, true, true, false};

  bool has(AttributeSet s) const { return enabled[static_cast<int>(s) - 1]; }

  static AttributeSelection parse(const std::string& text) {
    AttributeSelection sel;
    sel.enabled.fill(false);
    std::stringstream ss(text);
    std::string tok;
    bool any = false;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      int k = 0;
      try {
        std::size_t used = 0;
        k = std::stoi(tok, &used);
        if (used != tok.size()) k = 0;
      } catch (const std::exception&) {
        k = 0;
      }
      if (k < 1 || k > 4) throw invalid_input("attribute set '" + tok + "' is not one of 1,2,3,4");
      sel.enabled[k - 1] = true;
      any = true;
    }
    if (!any) throw invalid_input("no attribute sets selected");
    return sel;
  }

  std::string to_string() const {
    std::string out;
    for (int k = 0; k < 4; ++k)
      if (enabled[k]) out += (out.empty() ? "" : ",") + std::to_string(k + 1);
    return out;
  }

  bool operator==(const AttributeSelection&) const = default;
};

struct LayoutEntry {
  std::string name;  // attribute set name
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
  bool operator==(const LayoutEntry&) const = default;
};

/// N x F node-attribute matrix plus the column layout per attribute set.
struct FeatureMatrix {
  Tensor x;
  std::vector<LayoutEntry> layout;

  std::size_t n() const { return x.rows(); }
  std::size_t f() const { return x.cols(); }

  const LayoutEntry* find(const std::string& name) const {
    for (const auto& e : layout)
      if (e.name == name) return &e;
    return nullptr;
  }

  bool operator==(const FeatureMatrix&) const = default;
};

/// True when the layout entries tile [0, f) contiguously in order.
inline bool layout_partitions_columns(const FeatureMatrix& fm) {
  std::size_t at = 0;
  for (const auto& e : fm.layout) {
    if (e.begin != at || e.end < e.begin) return false;
    at = e.end;
  }
  return at == fm.f();
}

inline std::vector<std::string> layout_names(const std::vector<LayoutEntry>& layout) {
  std::vector<std::string> out;
  for (const auto& e : layout) out.push_back(e.name);
  return out;
}

/// Column subset of `full` holding only the selected sets, in set order.
inline FeatureMatrix select_sets(const FeatureMatrix& full, const AttributeSelection& sel) {
  FeatureMatrix out;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::size_t width = 0;
  for (int k = 1; k <= 4; ++k) {
    const auto set = static_cast<AttributeSet>(k);
    if (!sel.has(set)) continue;
    const LayoutEntry* e = full.find(attribute_set_name(set));
    if (e == nullptr) throw invalid_input(std::string("feature matrix lacks attribute set '") + attribute_set_name(set) + "'");
    out.layout.push_back({e->name, width, width + (e->end - e->begin)});
    ranges.emplace_back(e->begin, e->end);
    width += e->end - e->begin;
  }
  out.x = Tensor(full.n(), width);
  for (std::size_t r = 0; r < full.n(); ++r) {
    std::size_t c = 0;
    for (auto [b, e] : ranges)
      for (std::size_t k = b; k < e; ++k) out.x(r, c++) = full.x(r, k);
  }
  return out;
}

/// Per-column mean / standard deviation of the distance-based attributes.
struct StandardizationStats {
  std::vector<double> mean;
  std::vector<double> stddev;
  bool empty() const { return mean.empty(); }
  bool operator==(const StandardizationStats&) const = default;
};

inline StandardizationStats compute_standardization(const std::vector<const FeatureMatrix*>& training) {
  StandardizationStats st;
  std::size_t count = 0;
  for (const FeatureMatrix* fm : training) {
    const LayoutEntry* e = fm->find(attribute_set_name(AttributeSet::distance));
    if (e == nullptr) return {};
    const std::size_t w = e->end - e->begin;
    if (st.mean.empty()) {
      st.mean.assign(w, 0.0);
      st.stddev.assign(w, 0.0);
    }
    for (std::size_t r = 0; r < fm->n(); ++r)
      for (std::size_t c = 0; c < w; ++c) st.mean[c] += fm->x(r, e->begin + c);
    count += fm->n();
  }
  if (count == 0) return {};
  for (double& m : st.mean) m /= static_cast<double>(count);
  for (const FeatureMatrix* fm : training) {
    const LayoutEntry* e = fm->find(attribute_set_name(AttributeSet::distance));
    for (std::size_t r = 0; r < fm->n(); ++r)
      for (std::size_t c = 0; c < st.mean.size(); ++c) {
        const double d = fm->x(r, e->begin + c) - st.mean[c];
        st.stddev[c] += d * d;
      }
  }
  for (double& s : st.stddev) {
    s = std::sqrt(s / static_cast<double>(count));
    if (s < 1e-12) s = 1.0;
  }
  return st;
}

inline void apply_standardization(FeatureMatrix& fm, const StandardizationStats& st) {
  if (st.empty()) return;
  const LayoutEntry* e = fm.find(attribute_set_name(AttributeSet::distance));
  if (e == nullptr) return;
  if (e->end - e->begin != st.mean.size()) throw invalid_input("standardization width does not match distance attribute columns");
  for (std::size_t r = 0; r < fm.n(); ++r)
    for (std::size_t c = 0; c < st.mean.size(); ++c) {
      double& v = fm.x(r, e->begin + c);
      v = (v - st.mean[c]) / st.stddev[c];
    }
}

}  // namespace itl

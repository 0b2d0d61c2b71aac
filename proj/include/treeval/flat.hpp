#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "treeval/cart.hpp"
#include "treeval/ensemble.hpp"

namespace treeval {

/// A fitted model rewritten as sum_i values[i] * 1{x in cells[i]}.
///
/// Cells are stored densely: bounds of cell i occupy
/// [i*dim, (i+1)*dim) of lower_/upper_, coordinates ordered s*d + j, with
/// +-inf for unbounded sides. Cells of one source tree partition the space;
/// cells of different trees overlap.
class FlatEnsemble {
 public:
  FlatEnsemble() = default;
  FlatEnsemble(std::size_t components, std::size_t periods);

  void add(std::span<const double> lower, std::span<const double> upper,
           double value);

  std::size_t size() const { return values_.size(); }
  std::size_t components() const { return d_; }
  std::size_t periods() const { return T_; }
  std::size_t dim() const { return d_ * T_; }

  std::span<const double> lower(std::size_t i) const {
    return {lower_.data() + i * dim(), dim()};
  }
  std::span<const double> upper(std::size_t i) const {
    return {upper_.data() + i * dim(), dim()};
  }
  double value(std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  Hyperrectangle cell(std::size_t i) const;

  /// Same cells, values multiplied by `factor`.
  FlatEnsemble scaled(double factor) const;

  /// Appends every cell of `other` (dims must agree).
  void append(const FlatEnsemble& other);

  /// Compensated sum of the values of all cells containing x.
  double evaluate(std::span<const double> x) const;

  bool operator==(const FlatEnsemble&) const = default;

 private:
  std::size_t d_ = 0;
  std::size_t T_ = 0;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> values_;
};

/// One (cell, value) pair per leaf, leaves in depth-first left-to-right
/// order, values multiplied by `scale`. Requires d*T == tree.dim().
FlatEnsemble flatten_tree(const RegressionTree& tree, std::size_t d,
                          std::size_t T, double scale = 1.0);

/// Concatenated per-tree flattenings, values scaled by 1/M.
FlatEnsemble flatten_forest(const FittedForest& model, std::size_t d,
                            std::size_t T);

/// A full-space cell with the base value, then each round's leaves scaled
/// by -learning_rate * gamma_t.
FlatEnsemble flatten_boost(const FittedBoost& model, std::size_t d,
                           std::size_t T);

FlatEnsemble flatten(const Model& model, std::size_t d, std::size_t T);

double evaluate_flat(const FlatEnsemble& fe, std::span<const double> x);

// Interchange formats. Text: a header line "treeval-flat v1 <d> <T> <N>"
// followed by N lines "value a b a b ..." with one (lower, upper) pair per
// coordinate in s*d + j order; "inf" / "-inf" for unbounded sides.
// Binary: magic "TVFLAT", u16 version, u64 d, T, N, then N*(1 + 2*d*T)
// little-endian doubles laid out like the text rows.
void write_flat_text(std::ostream& os, const FlatEnsemble& fe);
FlatEnsemble read_flat_text(std::istream& is);
void write_flat_binary(std::ostream& os, const FlatEnsemble& fe);
FlatEnsemble read_flat_binary(std::istream& is);

/// Picks the format by extension: ".txt" text, anything else binary.
void save_flat(const std::filesystem::path& path, const FlatEnsemble& fe);
FlatEnsemble load_flat(const std::filesystem::path& path);

}  // namespace treeval

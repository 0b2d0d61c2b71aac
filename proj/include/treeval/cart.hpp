#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace treeval {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Half-open box (lower, upper] in path space. Coordinates are flattened as
/// s*d + j. An upper bound of +inf means the interval is open above.
struct Hyperrectangle {
  std::vector<double> lower;
  std::vector<double> upper;

  static Hyperrectangle full(std::size_t dim);

  std::size_t dim() const { return lower.size(); }
  bool contains(std::span<const double> x) const;
};

/// Row-major rows x cols matrix of training inputs. Not owning.
struct FeatureView {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::span<const double> row(std::size_t i) const {
    return {data + i * cols, cols};
  }
  double at(std::size_t i, std::size_t c) const { return data[i * cols + c]; }
};

struct TreeConfig {
  std::size_t nodesize = 2;                   // min points to split a cell
  std::size_t min_leaf = 1;                   // min points in each child
  std::optional<std::size_t> max_leaves;      // K
  std::optional<std::size_t> max_depth;
  std::optional<std::size_t> feature_subset;  // p, unset = all coordinates
  std::uint64_t seed = 0;
  std::uint32_t lane = 0;  // tree index inside an ensemble

  void validate(std::size_t dim) const;
};

struct SplitCandidate {
  std::size_t coord = 0;
  double threshold = 0.0;
  /// Within-group sum of squared deviations of the two children.
  double score = 0.0;
};

/// Best axis-aligned split of `points` (row indices into x, repeats allowed)
/// over the given coordinates. Thresholds are midpoints of consecutive
/// distinct values; ties go to the smallest (coord, threshold). Returns
/// nullopt when no split strictly lowers the parent's sum of squares.
std::optional<SplitCandidate> best_split(FeatureView x,
                                         std::span<const double> responses,
                                         std::span<const std::size_t> points,
                                         std::span<const std::size_t> coords);

struct TreeNode {
  std::int32_t coord = -1;  // -1 marks a leaf
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  double threshold = 0.0;
  double value = 0.0;       // mean response of the cell's training points
  std::size_t count = 0;
  double sse = 0.0;         // sum of squared deviations in the cell
  double split_score = 0.0; // children's combined sse, internal nodes only

  bool is_leaf() const { return coord < 0; }
};

class RegressionTree {
 public:
  RegressionTree() = default;
  RegressionTree(std::size_t dim, std::vector<TreeNode> nodes)
      : dim_(dim), nodes_(std::move(nodes)) {}

  /// Single-leaf tree with the given value over R^dim.
  static RegressionTree constant(std::size_t dim, double value);

  double predict(std::span<const double> x) const {
    std::uint32_t k = 0;
    while (nodes_[k].coord >= 0) {
      const TreeNode& n = nodes_[k];
      k = x[static_cast<std::size_t>(n.coord)] <= n.threshold ? n.left : n.right;
    }
    return nodes_[k].value;
  }

  std::size_t dim() const { return dim_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t leaf_count() const;
  std::size_t depth() const;

  struct Leaf {
    double value;
    std::size_t count;
    Hyperrectangle cell;
  };
  /// Leaves in depth-first left-to-right order with their cells.
  std::vector<Leaf> leaves() const;

  /// Accepted splits in pre-order.
  std::vector<SplitCandidate> split_sequence() const;

 private:
  std::size_t dim_ = 0;
  std::vector<TreeNode> nodes_;
};

/// Grows a CART tree on all rows of x.
RegressionTree fit_tree(FeatureView x, std::span<const double> responses,
                        const TreeConfig& cfg);

/// Grows a CART tree on a resampled row multiset (bootstrap draws may repeat).
RegressionTree fit_tree(FeatureView x, std::span<const double> responses,
                        std::span<const std::size_t> rows,
                        const TreeConfig& cfg);

}  // namespace treeval

#include "treeval/cart.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "treeval/error.hpp"
#include "treeval/rng.hpp"

namespace treeval {

Hyperrectangle Hyperrectangle::full(std::size_t dim) {
  return {std::vector<double>(dim, -kInf), std::vector<double>(dim, kInf)};
}

bool Hyperrectangle::contains(std::span<const double> x) const {
  for (std::size_t c = 0; c < lower.size(); ++c)
    if (!(lower[c] < x[c] && x[c] <= upper[c])) return false;
  return true;
}

void TreeConfig::validate(std::size_t dim) const {
  require(nodesize >= 2, ErrorKind::Config, "tree: nodesize must be >= 2");
  require(min_leaf >= 1, ErrorKind::Config, "tree: min_leaf must be >= 1");
  if (max_leaves)
    require(*max_leaves >= 1, ErrorKind::Config, "tree: max_leaves must be >= 1");
  if (feature_subset)
    require(*feature_subset >= 1 && *feature_subset <= dim, ErrorKind::Config,
            "tree: feature subset p must lie in 1.." + std::to_string(dim));
}

namespace {

struct Best {
  bool found = false;
  SplitCandidate split;
};

// One coordinate's scan over values sorted ascending with their centered
// responses. A candidate replaces the incumbent only if it is better by more
// than `tol`, so mathematically tied scores keep the lexicographically
// smallest (coord, threshold).
void scan_coordinate(const double* vals, const double* cen, std::size_t m,
                     double total_sum, double total_sq, std::size_t coord,
                     double tol, Best& best, double& best_score,
                     std::size_t min_leaf = 1) {
  double sl = 0.0, ql = 0.0;
  for (std::size_t k = 0; k + 1 < m; ++k) {
    sl += cen[k];
    ql += cen[k] * cen[k];
    if (!(vals[k] < vals[k + 1])) continue;
    if (k + 1 < min_leaf || m - k - 1 < min_leaf) continue;
    const double nl = static_cast<double>(k + 1);
    const double nr = static_cast<double>(m - k - 1);
    const double sr = total_sum - sl;
    const double qr = total_sq - ql;
    const double score = (ql - sl * sl / nl) + (qr - sr * sr / nr);
    if (score < best_score - tol) {
      double z = 0.5 * (vals[k] + vals[k + 1]);
      if (!(z < vals[k + 1])) z = vals[k];
      best_score = score;
      best.found = true;
      best.split = {coord, z, score};
    }
  }
}

struct NodeStats {
  double mean = 0.0;
  double sse = 0.0;
  bool constant = true;
};

NodeStats node_stats(const double* y, std::size_t m) {
  NodeStats s;
  double sum = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    sum += y[k];
    if (y[k] != y[0]) s.constant = false;
  }
  s.mean = sum / static_cast<double>(m);
  for (std::size_t k = 0; k < m; ++k) s.sse += (y[k] - s.mean) * (y[k] - s.mean);
  if (s.constant) s.sse = 0.0;
  return s;
}

constexpr double kRelTol = 1e-12;

void check_finite(std::span<const double> v, const char* what) {
  for (double e : v)
    if (!std::isfinite(e))
      throw Error(ErrorKind::Numeric, std::string("fit_tree: non-finite ") + what);
}

class Grower {
 public:
  Grower(FeatureView x, std::span<const double> y,
         std::span<const std::size_t> rows, const TreeConfig& cfg)
      : cfg_(cfg),
        dim_(x.cols),
        m_(rows.size()),
        col_(dim_ * m_),
        y_(m_),
        order_(dim_ * m_),
        goes_left_(m_),
        tmp_(m_),
        vals_(m_),
        cen_(m_),
        rng_(cfg.seed, Stream::Features, cfg.lane) {
    for (std::size_t p = 0; p < m_; ++p) {
      const std::size_t r = rows[p];
      y_[p] = y[r];
      for (std::size_t c = 0; c < dim_; ++c) col_[c * m_ + p] = x.at(r, c);
    }
    for (std::size_t c = 0; c < dim_; ++c) {
      auto* o = order_.data() + c * m_;
      std::iota(o, o + m_, 0u);
      const double* v = col_.data() + c * m_;
      std::stable_sort(o, o + m_, [v](std::uint32_t a, std::uint32_t b) {
        return v[a] < v[b];
      });
    }
    all_coords_.resize(dim_);
    std::iota(all_coords_.begin(), all_coords_.end(), std::size_t{0});
  }

  RegressionTree grow() {
    nodes_.push_back({});
    Pending root = evaluate(0, 0, m_, 0);
    if (cfg_.max_leaves)
      grow_best_first(root);
    else
      grow_depth_first(root);
    return RegressionTree(dim_, std::move(nodes_));
  }

 private:
  struct Pending {
    std::uint32_t node;
    std::size_t begin, end, depth;
    Best best;
  };

  std::vector<std::size_t> draw_coords() {
    if (!cfg_.feature_subset || *cfg_.feature_subset >= dim_) return all_coords_;
    std::vector<std::size_t> pool = all_coords_;
    const std::size_t p = *cfg_.feature_subset;
    for (std::size_t i = 0; i < p; ++i) {
      const std::size_t j = i + rng_.next_below(dim_ - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(p);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  Pending evaluate(std::uint32_t id, std::size_t begin, std::size_t end,
                   std::size_t depth) {
    const std::size_t m = end - begin;
    const std::uint32_t* seg = order_.data() + begin;  // coordinate 0 order
    for (std::size_t k = 0; k < m; ++k) vals_[k] = y_[seg[k]];
    const NodeStats st = node_stats(vals_.data(), m);

    TreeNode& node = nodes_[id];
    node.value = st.mean;
    node.count = m;
    node.sse = st.sse;

    Pending pend{id, begin, end, depth, {}};
    const bool splittable = m >= cfg_.nodesize && m >= 2 * cfg_.min_leaf &&
                            !st.constant &&
                            (!cfg_.max_depth || depth < *cfg_.max_depth);
    if (!splittable) return pend;

    double best_score = st.sse - kRelTol * st.sse;
    const double tol = kRelTol * st.sse;
    for (std::size_t c : draw_coords()) {
      const std::uint32_t* o = order_.data() + c * m_ + begin;
      const double* v = col_.data() + c * m_;
      double sum = 0.0, sq = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        vals_[k] = v[o[k]];
        cen_[k] = y_[o[k]] - st.mean;
        sum += cen_[k];
        sq += cen_[k] * cen_[k];
      }
      scan_coordinate(vals_.data(), cen_.data(), m, sum, sq, c, tol, pend.best,
                      best_score, cfg_.min_leaf);
    }
    return pend;
  }

  // Applies the pending split, returns the two children.
  std::pair<Pending, Pending> apply(const Pending& p) {
    const SplitCandidate& s = p.best.split;
    const double* v = col_.data() + s.coord * m_;
    std::size_t nl = 0;
    {
      const std::uint32_t* o = order_.data() + p.begin;
      for (std::size_t k = p.begin; k < p.end; ++k) {
        const std::uint32_t pos = o[k - p.begin];
        goes_left_[pos] = v[pos] <= s.threshold ? 1 : 0;
        nl += goes_left_[pos];
      }
    }
    for (std::size_t c = 0; c < dim_; ++c) {
      std::uint32_t* o = order_.data() + c * m_;
      std::size_t l = p.begin, r = 0;
      for (std::size_t k = p.begin; k < p.end; ++k) {
        if (goes_left_[o[k]])
          o[l++] = o[k];
        else
          tmp_[r++] = o[k];
      }
      std::copy(tmp_.begin(), tmp_.begin() + static_cast<std::ptrdiff_t>(r),
                o + l);
    }

    const auto left = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    nodes_.push_back({});
    TreeNode& parent = nodes_[p.node];
    parent.coord = static_cast<std::int32_t>(s.coord);
    parent.threshold = s.threshold;
    parent.split_score = s.score;
    parent.left = left;
    parent.right = left + 1;

    Pending lp = evaluate(left, p.begin, p.begin + nl, p.depth + 1);
    Pending rp = evaluate(left + 1, p.begin + nl, p.end, p.depth + 1);
    return {lp, rp};
  }

  void grow_depth_first(Pending root) {
    std::vector<Pending> stack{root};
    while (!stack.empty()) {
      Pending p = stack.back();
      stack.pop_back();
      if (!p.best.found) continue;
      auto [l, r] = apply(p);
      stack.push_back(r);
      stack.push_back(l);
    }
  }

  void grow_best_first(Pending root) {
    auto worse = [this](const Pending& a, const Pending& b) {
      const double ga = nodes_[a.node].sse - a.best.split.score;
      const double gb = nodes_[b.node].sse - b.best.split.score;
      if (ga != gb) return ga < gb;
      return a.node > b.node;
    };
    std::priority_queue<Pending, std::vector<Pending>, decltype(worse)> queue(worse);
    if (root.best.found) queue.push(root);
    std::size_t leaves = 1;
    while (!queue.empty() && leaves < *cfg_.max_leaves) {
      Pending p = queue.top();
      queue.pop();
      auto [l, r] = apply(p);
      ++leaves;
      if (l.best.found) queue.push(l);
      if (r.best.found) queue.push(r);
    }
  }

  const TreeConfig& cfg_;
  std::size_t dim_;
  std::size_t m_;
  std::vector<double> col_;
  std::vector<double> y_;
  std::vector<std::uint32_t> order_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::uint32_t> tmp_;
  std::vector<double> vals_;
  std::vector<double> cen_;
  std::vector<std::size_t> all_coords_;
  CounterRng rng_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

std::optional<SplitCandidate> best_split(FeatureView x,
                                         std::span<const double> responses,
                                         std::span<const std::size_t> points,
                                         std::span<const std::size_t> coords) {
  const std::size_t m = points.size();
  if (m < 2) return std::nullopt;
  std::vector<double> ys(m);
  for (std::size_t k = 0; k < m; ++k) ys[k] = responses[points[k]];
  const NodeStats st = node_stats(ys.data(), m);
  if (st.constant) return std::nullopt;

  std::vector<std::size_t> sorted_coords(coords.begin(), coords.end());
  std::sort(sorted_coords.begin(), sorted_coords.end());

  Best best;
  double best_score = st.sse - kRelTol * st.sse;
  std::vector<std::size_t> idx(m);
  std::vector<double> vals(m), cen(m);
  for (std::size_t c : sorted_coords) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return x.at(points[a], c) < x.at(points[b], c);
    });
    double sum = 0.0, sq = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      vals[k] = x.at(points[idx[k]], c);
      cen[k] = ys[idx[k]] - st.mean;
      sum += cen[k];
      sq += cen[k] * cen[k];
    }
    scan_coordinate(vals.data(), cen.data(), m, sum, sq, c, kRelTol * st.sse,
                    best, best_score);
  }
  if (!best.found) return std::nullopt;
  return best.split;
}

RegressionTree RegressionTree::constant(std::size_t dim, double value) {
  TreeNode leaf;
  leaf.value = value;
  return RegressionTree(dim, {leaf});
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(),
                    [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t RegressionTree::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0u, 0}};
  while (!stack.empty()) {
    auto [k, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes_[k].is_leaf()) {
      stack.emplace_back(nodes_[k].left, d + 1);
      stack.emplace_back(nodes_[k].right, d + 1);
    }
  }
  return best;
}

std::vector<RegressionTree::Leaf> RegressionTree::leaves() const {
  std::vector<Leaf> out;
  struct Frame {
    std::uint32_t node;
    Hyperrectangle cell;
  };
  std::vector<Frame> stack{{0u, Hyperrectangle::full(dim_)}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    const TreeNode& n = nodes_[f.node];
    if (n.is_leaf()) {
      out.push_back({n.value, n.count, std::move(f.cell)});
      continue;
    }
    const auto c = static_cast<std::size_t>(n.coord);
    Hyperrectangle right = f.cell;
    right.lower[c] = std::max(right.lower[c], n.threshold);
    f.cell.upper[c] = std::min(f.cell.upper[c], n.threshold);
    stack.push_back({n.right, std::move(right)});
    stack.push_back({n.left, std::move(f.cell)});
  }
  return out;
}

std::vector<SplitCandidate> RegressionTree::split_sequence() const {
  std::vector<SplitCandidate> out;
  std::vector<std::uint32_t> stack{0u};
  while (!stack.empty()) {
    const TreeNode& n = nodes_[stack.back()];
    stack.pop_back();
    if (n.is_leaf()) continue;
    out.push_back({static_cast<std::size_t>(n.coord), n.threshold, n.split_score});
    stack.push_back(n.right);
    stack.push_back(n.left);
  }
  return out;
}

RegressionTree fit_tree(FeatureView x, std::span<const double> responses,
                        const TreeConfig& cfg) {
  std::vector<std::size_t> rows(x.rows);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_tree(x, responses, rows, cfg);
}

RegressionTree fit_tree(FeatureView x, std::span<const double> responses,
                        std::span<const std::size_t> rows,
                        const TreeConfig& cfg) {
  require(x.rows >= 1 && !rows.empty(), ErrorKind::Precondition,
          "fit_tree: empty sample");
  require(responses.size() == x.rows, ErrorKind::Dimension,
          "fit_tree: responses and inputs differ in length");
  cfg.validate(x.cols);
  check_finite(responses, "response");
  check_finite({x.data, x.rows * x.cols}, "input");
  return Grower(x, responses, rows, cfg).grow();
}

}  // namespace treeval

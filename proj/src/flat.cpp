#include "treeval/flat.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "treeval/error.hpp"
#include "treeval/numeric.hpp"

namespace treeval {

FlatEnsemble::FlatEnsemble(std::size_t components, std::size_t periods)
    : d_(components), T_(periods) {}

void FlatEnsemble::add(std::span<const double> lower,
                       std::span<const double> upper, double value) {
  require(lower.size() == dim() && upper.size() == dim(), ErrorKind::Dimension,
          "FlatEnsemble::add: cell bounds do not match d*T");
  lower_.insert(lower_.end(), lower.begin(), lower.end());
  upper_.insert(upper_.end(), upper.begin(), upper.end());
  values_.push_back(value);
}

Hyperrectangle FlatEnsemble::cell(std::size_t i) const {
  const auto lo = lower(i);
  const auto hi = upper(i);
  return {{lo.begin(), lo.end()}, {hi.begin(), hi.end()}};
}

FlatEnsemble FlatEnsemble::scaled(double factor) const {
  FlatEnsemble out = *this;
  for (double& v : out.values_) v *= factor;
  return out;
}

void FlatEnsemble::append(const FlatEnsemble& other) {
  require(other.d_ == d_ && other.T_ == T_, ErrorKind::Dimension,
          "FlatEnsemble::append: dims differ");
  lower_.insert(lower_.end(), other.lower_.begin(), other.lower_.end());
  upper_.insert(upper_.end(), other.upper_.begin(), other.upper_.end());
  values_.insert(values_.end(), other.values_.begin(), other.values_.end());
}

double FlatEnsemble::evaluate(std::span<const double> x) const {
  const std::size_t D = dim();
  CompensatedSum sum;
  const double* lo = lower_.data();
  const double* hi = upper_.data();
  for (std::size_t i = 0; i < values_.size(); ++i, lo += D, hi += D) {
    std::size_t c = 0;
    while (c < D && lo[c] < x[c] && x[c] <= hi[c]) ++c;
    if (c == D) sum.add(values_[i]);
  }
  return sum.value();
}

double evaluate_flat(const FlatEnsemble& fe, std::span<const double> x) {
  require(x.size() == fe.dim(), ErrorKind::Dimension,
          "evaluate_flat: point dimension does not match d*T");
  return fe.evaluate(x);
}

FlatEnsemble flatten_tree(const RegressionTree& tree, std::size_t d,
                          std::size_t T, double scale) {
  require(d * T == tree.dim(), ErrorKind::Dimension,
          "flatten_tree: tree dimension is not d*T");
  FlatEnsemble out(d, T);
  for (const auto& leaf : tree.leaves())
    out.add(leaf.cell.lower, leaf.cell.upper, scale * leaf.value);
  return out;
}

FlatEnsemble flatten_forest(const FittedForest& model, std::size_t d,
                            std::size_t T) {
  FlatEnsemble out(d, T);
  const double w = 1.0 / static_cast<double>(model.trees.size());
  for (const auto& tree : model.trees) {
    for (const auto& leaf : tree.leaves())
      out.add(leaf.cell.lower, leaf.cell.upper, leaf.value * w);
  }
  return out;
}

FlatEnsemble flatten_boost(const FittedBoost& model, std::size_t d,
                           std::size_t T) {
  require(d * T == model.dim, ErrorKind::Dimension,
          "flatten_boost: model dimension is not d*T");
  FlatEnsemble out(d, T);
  const Hyperrectangle all = Hyperrectangle::full(d * T);
  out.add(all.lower, all.upper, model.base);
  for (std::size_t t = 0; t < model.trees.size(); ++t)
    out.append(flatten_tree(model.trees[t], d, T, -model.step(t)));
  return out;
}

FlatEnsemble flatten(const Model& model, std::size_t d, std::size_t T) {
  if (model.is_forest()) return flatten_forest(model.forest(), d, T);
  return flatten_boost(model.boost(), d, T);
}

namespace {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& tok, std::size_t line) {
  if (tok == "inf" || tok == "+inf") return kInf;
  if (tok == "-inf") return -kInf;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw Error(ErrorKind::Io, "flat text line " + std::to_string(line) +
                                   ": bad number '" + tok + "'");
  return v;
}

constexpr char kMagic[6] = {'T', 'V', 'F', 'L', 'A', 'T'};
constexpr std::uint16_t kBinaryVersion = 1;

template <typename U>
U swap_bytes(U v) {
  if constexpr (sizeof(U) == 2) return __builtin_bswap16(v);
  else return __builtin_bswap64(v);
}

template <typename U>
void put(std::ostream& os, U v) {
  if constexpr (std::endian::native == std::endian::big) v = swap_bytes(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename U>
U get(std::istream& is) {
  U v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw Error(ErrorKind::Io, "flat binary: truncated input");
  if constexpr (std::endian::native == std::endian::big) v = swap_bytes(v);
  return v;
}

void put_double(std::ostream& os, double v) {
  put(os, std::bit_cast<std::uint64_t>(v));
}
double get_double(std::istream& is) {
  return std::bit_cast<double>(get<std::uint64_t>(is));
}

}  // namespace

void write_flat_text(std::ostream& os, const FlatEnsemble& fe) {
  os << "treeval-flat v1 " << fe.components() << ' ' << fe.periods() << ' '
     << fe.size() << '\n';
  for (std::size_t i = 0; i < fe.size(); ++i) {
    os << format_double(fe.value(i));
    const auto lo = fe.lower(i);
    const auto hi = fe.upper(i);
    for (std::size_t c = 0; c < fe.dim(); ++c)
      os << ' ' << format_double(lo[c]) << ' ' << format_double(hi[c]);
    os << '\n';
  }
}

FlatEnsemble read_flat_text(std::istream& is) {
  std::string header;
  if (!std::getline(is, header))
    throw Error(ErrorKind::Io, "flat text: missing header");
  std::istringstream hs(header);
  std::string tag, version;
  std::size_t d = 0, T = 0, N = 0;
  hs >> tag >> version >> d >> T >> N;
  if (tag != "treeval-flat" || version != "v1" || !hs || d == 0 || T == 0)
    throw Error(ErrorKind::Io, "flat text line 1: expected 'treeval-flat v1 d T N'");
  FlatEnsemble out(d, T);
  std::vector<double> lo(d * T), hi(d * T);
  std::string line, tok;
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t lineno = i + 2;
    if (!std::getline(is, line))
      throw Error(ErrorKind::Io, "flat text: expected " + std::to_string(N) +
                                     " cells, got " + std::to_string(i));
    std::istringstream ls(line);
    std::vector<std::string> toks;
    while (ls >> tok) toks.push_back(tok);
    if (toks.size() != 1 + 2 * d * T)
      throw Error(ErrorKind::Io, "flat text line " + std::to_string(lineno) +
                                     ": expected " + std::to_string(1 + 2 * d * T) +
                                     " fields");
    const double v = parse_double(toks[0], lineno);
    for (std::size_t c = 0; c < d * T; ++c) {
      lo[c] = parse_double(toks[1 + 2 * c], lineno);
      hi[c] = parse_double(toks[2 + 2 * c], lineno);
      if (!(lo[c] < hi[c]))
        throw Error(ErrorKind::Io, "flat text line " + std::to_string(lineno) +
                                       ": empty interval");
    }
    out.add(lo, hi, v);
  }
  return out;
}

void write_flat_binary(std::ostream& os, const FlatEnsemble& fe) {
  os.write(kMagic, sizeof kMagic);
  put<std::uint16_t>(os, kBinaryVersion);
  put<std::uint64_t>(os, fe.components());
  put<std::uint64_t>(os, fe.periods());
  put<std::uint64_t>(os, fe.size());
  for (std::size_t i = 0; i < fe.size(); ++i) {
    put_double(os, fe.value(i));
    const auto lo = fe.lower(i);
    const auto hi = fe.upper(i);
    for (std::size_t c = 0; c < fe.dim(); ++c) {
      put_double(os, lo[c]);
      put_double(os, hi[c]);
    }
  }
}

FlatEnsemble read_flat_binary(std::istream& is) {
  char magic[sizeof kMagic];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw Error(ErrorKind::Io, "flat binary: bad magic");
  const auto version = get<std::uint16_t>(is);
  if (version != kBinaryVersion)
    throw Error(ErrorKind::Io, "flat binary: unsupported version " +
                                   std::to_string(version));
  const auto d = get<std::uint64_t>(is);
  const auto T = get<std::uint64_t>(is);
  const auto N = get<std::uint64_t>(is);
  FlatEnsemble out(d, T);
  std::vector<double> lo(d * T), hi(d * T);
  for (std::uint64_t i = 0; i < N; ++i) {
    const double v = get_double(is);
    for (std::size_t c = 0; c < d * T; ++c) {
      lo[c] = get_double(is);
      hi[c] = get_double(is);
    }
    out.add(lo, hi, v);
  }
  return out;
}

void save_flat(const std::filesystem::path& path, const FlatEnsemble& fe) {
  const bool text = path.extension() == ".txt";
  std::ofstream os(path, text ? std::ios::out : std::ios::out | std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
  if (text)
    write_flat_text(os, fe);
  else
    write_flat_binary(os, fe);
  if (!os) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

FlatEnsemble load_flat(const std::filesystem::path& path) {
  const bool text = path.extension() == ".txt";
  std::ifstream is(path, text ? std::ios::in : std::ios::in | std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot read " + path.string());
  return text ? read_flat_text(is) : read_flat_binary(is);
}

}  // namespace treeval

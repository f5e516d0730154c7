#include "marked_io.hpp"

#include <istream>
#include <ostream>
#include <string>

#include "error.hpp"
#include "textio.hpp"

namespace rcg {

namespace {

constexpr const char* kHeader = "# rcgibbs marked v1";

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::vector<std::string> expect(const std::string& key) {
    std::string line;
    if (!std::getline(in_, line)) fail(ErrorCode::Parse, where() + "missing '" + key + "'");
    ++line_no_;
    auto toks = textio::split_ws(line);
    if (toks.empty() || toks[0] != key)
      fail(ErrorCode::Parse, where() + "expected '" + key + "', got '" + line + "'");
    toks.erase(toks.begin());
    return toks;
  }
  std::string next_line() {
    std::string line;
    if (!std::getline(in_, line)) fail(ErrorCode::Parse, where() + "unexpected end of file");
    ++line_no_;
    return line;
  }
  std::string where() const { return "marked file line " + std::to_string(line_no_ + 1) + ": "; }
  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

long long single_int(const std::vector<std::string>& toks, const std::string& ctx) {
  if (toks.size() != 1) fail(ErrorCode::Parse, ctx + ": expected one value");
  return textio::parse_int(toks[0], ctx);
}

std::vector<double> doubles(const std::vector<std::string>& toks, std::size_t n, const std::string& ctx) {
  if (toks.size() != n)
    fail(ErrorCode::DimensionMismatch,
         ctx + ": expected " + std::to_string(n) + " values, got " + std::to_string(toks.size()));
  std::vector<double> v;
  for (const auto& t : toks) v.push_back(textio::parse_double(t, ctx));
  return v;
}

}  // namespace

void save_marked(std::ostream& out, const MarkedFile& file, bool hex) {
  require(file.dimension >= 1 && file.spin_dim >= 1, "marked: dimensions must be >= 1");
  for (const auto& r : file.records) {
    if (r.config.dim() != file.dimension || r.sigma.spin_dim() != file.spin_dim ||
        r.sigma.size() != r.config.size())
      fail(ErrorCode::DimensionMismatch, "marked: record does not match header dimensions");
  }
  out << kHeader << "\n";
  out << "dimension " << file.dimension << "\n";
  out << "spin_dim " << file.spin_dim << "\n";
  out << "radius " << textio::format_double(file.radius, hex) << "\n";
  out << "records " << file.records.size() << "\n";
  for (std::size_t k = 0; k < file.records.size(); ++k) {
    const auto& r = file.records[k];
    const auto& w = r.config.window();
    const auto& p = r.config.provenance();
    out << "record " << k << "\n";
    out << "lower " << textio::join(w.lower(), hex) << "\n";
    out << "upper " << textio::join(w.upper(), hex) << "\n";
    out << "origin " << textio::join(w.origin(), hex) << "\n";
    out << "sampler " << p.sampler << "\n";
    out << "seed " << p.seed << "\n";
    out << "spec " << p.spec.kind_name() << " " << textio::format_double(p.spec.intensity, hex) << " "
        << textio::format_double(p.spec.hardcore_radius, hex) << "\n";
    out << "points " << r.config.size() << "\n";
    for (std::size_t i = 0; i < r.config.size(); ++i) {
      const auto x = r.config.point(i);
      const auto s = r.sigma.spin(i);
      std::vector<double> row(x.begin(), x.end());
      row.insert(row.end(), s.begin(), s.end());
      out << textio::join(row, hex) << "\n";
    }
  }
}

MarkedFile load_marked(std::istream& in, int expected_dimension, int expected_spin_dim) {
  LineReader rd(in);
  if (textio::trim(rd.next_line()) != kHeader)
    fail(ErrorCode::Parse, "marked file: missing or unsupported header");
  MarkedFile f;
  f.dimension = static_cast<int>(single_int(rd.expect("dimension"), "dimension"));
  f.spin_dim = static_cast<int>(single_int(rd.expect("spin_dim"), "spin_dim"));
  if (f.dimension < 1 || f.spin_dim < 1) fail(ErrorCode::Parse, "marked file: dimensions must be >= 1");
  if (expected_dimension >= 0 && f.dimension != expected_dimension)
    fail(ErrorCode::DimensionMismatch, "marked file: dimension " + std::to_string(f.dimension) +
                                           " does not match expected " + std::to_string(expected_dimension));
  if (expected_spin_dim >= 0 && f.spin_dim != expected_spin_dim)
    fail(ErrorCode::DimensionMismatch, "marked file: spin dimension " + std::to_string(f.spin_dim) +
                                           " does not match expected " + std::to_string(expected_spin_dim));
  const auto radius_toks = rd.expect("radius");
  if (radius_toks.size() != 1) fail(ErrorCode::Parse, rd.where() + "radius expects one value");
  f.radius = textio::parse_double(radius_toks[0], "radius");
  const long long count = single_int(rd.expect("records"), "records");
  if (count < 0) fail(ErrorCode::Parse, "marked file: negative record count");
  const std::size_t n = static_cast<std::size_t>(f.dimension), m = static_cast<std::size_t>(f.spin_dim);
  for (long long k = 0; k < count; ++k) {
    if (single_int(rd.expect("record"), "record") != k)
      fail(ErrorCode::Parse, rd.where() + "records out of order");
    auto lower = doubles(rd.expect("lower"), n, rd.where() + "lower");
    auto upper = doubles(rd.expect("upper"), n, rd.where() + "upper");
    auto origin = doubles(rd.expect("origin"), n, rd.where() + "origin");
    Provenance prov;
    const auto sampler = rd.expect("sampler");
    if (sampler.size() != 1) fail(ErrorCode::Parse, rd.where() + "sampler expects one token");
    prov.sampler = sampler[0];
    const auto seed = rd.expect("seed");
    if (seed.size() != 1) fail(ErrorCode::Parse, rd.where() + "seed expects one value");
    try {
      prov.seed = std::stoull(seed[0]);
    } catch (const std::exception&) {
      fail(ErrorCode::Parse, rd.where() + "bad seed '" + seed[0] + "'");
    }
    const auto spec = rd.expect("spec");
    if (spec.size() != 3) fail(ErrorCode::Parse, rd.where() + "spec expects kind intensity radius");
    prov.spec.kind = ProcessSpec::parse_kind(spec[0]);
    prov.spec.intensity = textio::parse_double(spec[1], "spec intensity");
    prov.spec.hardcore_radius = textio::parse_double(spec[2], "spec radius");
    const long long points = single_int(rd.expect("points"), "points");
    if (points < 0) fail(ErrorCode::Parse, rd.where() + "negative point count");
    std::vector<double> coords, spins;
    coords.reserve(static_cast<std::size_t>(points) * n);
    spins.reserve(static_cast<std::size_t>(points) * m);
    for (long long i = 0; i < points; ++i) {
      const std::string ctx = rd.where() + "row";
      const auto row = doubles(textio::split_ws(rd.next_line()), n + m, ctx);
      coords.insert(coords.end(), row.begin(), row.begin() + n);
      spins.insert(spins.end(), row.begin() + n, row.end());
    }
    Window window(std::move(lower), std::move(upper), std::move(origin));
    f.records.push_back({Configuration(std::move(window), std::move(coords), prov),
                         SpinField(static_cast<std::size_t>(points), f.spin_dim, std::move(spins))});
  }
  return f;
}

}  // namespace rcg

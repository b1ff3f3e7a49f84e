#include "selgauss/interval_set.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include "selgauss/normal.hpp"
#include "selgauss/rng.hpp"

namespace selgauss {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMassUnderflow = 1e-300;

void validate_interval(const Interval& iv) {
  if (std::isnan(iv.lo) || std::isnan(iv.hi)) throw DomainError("interval endpoint is NaN");
  if (!(iv.lo <= iv.hi)) throw DomainError("interval has lo > hi");
  if (std::isinf(iv.lo) && iv.lo == iv.hi) throw DomainError("interval degenerate at infinity");
}

}  // namespace

CoordinateSet CoordinateSet::normalize(std::vector<Interval> intervals) {
  if (intervals.empty()) throw DomainError("empty interval union is not a valid set");
  for (const auto& iv : intervals) validate_interval(iv);
  std::sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });
  std::vector<Interval> merged;
  merged.push_back(intervals.front());
  for (std::size_t i = 1; i < intervals.size(); ++i) {
    if (intervals[i].lo <= merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, intervals[i].hi);
    } else {
      merged.push_back(intervals[i]);
    }
  }
  CoordinateSet cs;
  cs.intervals_ = std::move(merged);
  cs.std_measure_.reserve(cs.intervals_.size());
  for (const auto& iv : cs.intervals_) {
    const double m = norm_interval_prob(iv.lo, iv.hi);
    cs.std_measure_.push_back(m);
    cs.total_std_measure_ += m;
  }
  cs.total_std_measure_ = std::min(cs.total_std_measure_, 1.0);
  return cs;
}

CoordinateSet CoordinateSet::whole_line() { return normalize({{-kInf, kInf}}); }

CoordinateSet CoordinateSet::symmetric_tails(double a) {
  if (!(a > 0)) throw DomainError("symmetric_tails requires a > 0");
  return normalize({{-kInf, -a}, {a, kInf}});
}

bool CoordinateSet::is_whole_line() const {
  return intervals_.size() == 1 && intervals_[0].lo == -kInf && intervals_[0].hi == kInf;
}

CoordinateSet CoordinateSet::reflected(double center) const {
  std::vector<Interval> flipped;
  flipped.reserve(intervals_.size());
  for (const auto& iv : intervals_) flipped.push_back({2 * center - iv.hi, 2 * center - iv.lo});
  return normalize(std::move(flipped));
}

bool CoordinateSet::symmetric_about(double center, double tol) const {
  const CoordinateSet r = reflected(center);
  if (r.intervals_.size() != intervals_.size()) return false;
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    const auto close = [tol](double a, double b) {
      if (a == b) return true;  // covers matching infinities
      if (std::isinf(a) || std::isinf(b)) return false;
      return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
    };
    if (!close(r.intervals_[i].lo, intervals_[i].lo) || !close(r.intervals_[i].hi, intervals_[i].hi))
      return false;
  }
  return true;
}

bool CoordinateSet::operator==(const CoordinateSet& other) const {
  if (intervals_.size() != other.intervals_.size()) return false;
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    if (intervals_[i].lo != other.intervals_[i].lo || intervals_[i].hi != other.intervals_[i].hi)
      return false;
  }
  return true;
}

bool contains(const CoordinateSet& cs, double x) {
  for (const auto& iv : cs.intervals()) {
    if (x < iv.lo) return false;
    if (x <= iv.hi) return true;
  }
  return false;
}

double univariate_set_prob(const CoordinateSet& cs, double mean, double var) {
  if (!(var >= 0)) throw DomainError("variance must be nonnegative");
  if (var == 0) return contains(cs, mean) ? 1.0 : 0.0;
  if (cs.is_whole_line()) return 1.0;
  if (mean == 0.0 && var == 1.0) return cs.std_measure();
  const double sd = std::sqrt(var);
  double p = 0;
  for (const auto& iv : cs.intervals()) {
    p += norm_interval_prob((iv.lo - mean) / sd, (iv.hi - mean) / sd);
  }
  return std::clamp(p, 0.0, 1.0);
}

namespace {

// Invert the mass `target` measured from the left endpoint of [a,b] under
// N(mean, sd^2), staying on one tail of the CDF so far-out intervals keep
// relative accuracy.
double invert_in_interval(double a, double b, double mean, double sd, double target) {
  const double alpha = (a - mean) / sd;
  double z;
  if (alpha >= 0) {
    const double qa = norm_sf(alpha);
    z = -norm_quantile(std::max(qa - target, 0.0));
  } else {
    const double pa = norm_cdf(alpha);
    z = norm_quantile(std::min(pa + target, 1.0));
  }
  return std::clamp(mean + sd * z, a, b);
}

}  // namespace

double truncated_quantile(const CoordinateSet& cs, double mean, double var, double u) {
  if (!(var >= 0)) throw DomainError("variance must be nonnegative");
  if (!(u > 0.0 && u < 1.0)) throw DomainError("uniform must lie strictly in (0,1)");
  if (var == 0) {
    if (contains(cs, mean)) return mean;
    throw NumericalError("zero-variance point mass lies outside the set");
  }
  const double sd = std::sqrt(var);
  const auto& ivs = cs.intervals();
  std::vector<double> mass(ivs.size());
  double total = 0;
  for (std::size_t k = 0; k < ivs.size(); ++k) {
    mass[k] = norm_interval_prob((ivs[k].lo - mean) / sd, (ivs[k].hi - mean) / sd);
    total += mass[k];
  }
  if (total < kMassUnderflow) {
    // Degenerate intervals carry no continuous mass; treat them as point
    // masses weighted by the density before declaring underflow.
    double wsum = 0;
    std::vector<double> pw(ivs.size(), 0.0);
    for (std::size_t k = 0; k < ivs.size(); ++k) {
      if (ivs[k].lo == ivs[k].hi) {
        pw[k] = norm_pdf((ivs[k].lo - mean) / sd);
        wsum += pw[k];
      }
    }
    bool has_points = false;
    for (std::size_t k = 0; k < ivs.size(); ++k)
      if (ivs[k].lo == ivs[k].hi) has_points = true;
    if (!has_points)
      throw NumericalError("truncated normal mass underflow (< 1e-300); shift the mean or rescale");
    if (wsum > 0) {
      double target = u * wsum;
      for (std::size_t k = 0; k < ivs.size(); ++k) {
        if (ivs[k].lo != ivs[k].hi) continue;
        if (target <= pw[k]) return ivs[k].lo;
        target -= pw[k];
      }
    }
    // All point weights underflowed too: take the point closest to the mean,
    // positive side on ties.
    double best = ivs[0].lo, bestd = kInf;
    for (const auto& iv : ivs) {
      if (iv.lo != iv.hi) continue;
      const double d = std::abs(iv.lo - mean);
      if (d < bestd || (d == bestd && iv.lo > best)) {
        best = iv.lo;
        bestd = d;
      }
    }
    return best;
  }
  double target = u * total;
  for (std::size_t k = 0; k < ivs.size(); ++k) {
    if (target <= mass[k] || k + 1 == ivs.size()) {
      return invert_in_interval(ivs[k].lo, ivs[k].hi, mean, sd, std::min(target, mass[k]));
    }
    target -= mass[k];
  }
  return ivs.back().hi;  // unreachable
}

double sample_truncated_univariate(const CoordinateSet& cs, double mean, double var, Rng& rng) {
  return truncated_quantile(cs, mean, var, rng.uniform());
}

double nearest_feasible_point(const CoordinateSet& cs, double mean, double sd) {
  if (contains(cs, mean)) return mean;
  const auto& ivs = cs.intervals();
  double best = 0, bestd = kInf;
  bool have = false;
  for (const auto& iv : ivs) {
    double d;
    if (mean < iv.lo)
      d = iv.lo - mean;
    else if (mean > iv.hi)
      d = mean - iv.hi;
    else
      d = 0;
    double candidate;
    if (std::isinf(iv.lo) && std::isinf(iv.hi)) {
      candidate = mean;
    } else if (std::isinf(iv.lo)) {
      candidate = iv.hi - sd;
    } else if (std::isinf(iv.hi)) {
      candidate = iv.lo + sd;
    } else {
      candidate = 0.5 * (iv.lo + iv.hi);
    }
    if (!have || d < bestd || (d == bestd && candidate > best)) {
      best = candidate;
      bestd = d;
      have = true;
    }
  }
  return best;
}

namespace {

void skip_ws(std::string_view& s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
}

double parse_endpoint(std::string_view& s) {
  skip_ws(s);
  double sign = 1;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    if (s.front() == '-') sign = -1;
    s.remove_prefix(1);
  }
  skip_ws(s);
  if (s.size() >= 3) {
    std::string head(s.substr(0, std::min<std::size_t>(8, s.size())));
    std::transform(head.begin(), head.end(), head.begin(), ::tolower);
    if (head.rfind("infinity", 0) == 0) {
      s.remove_prefix(8);
      return sign * kInf;
    }
    if (head.rfind("inf", 0) == 0) {
      s.remove_prefix(3);
      return sign * kInf;
    }
  }
  double v = 0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc()) throw DomainError("cannot parse set endpoint near '" + std::string(s.substr(0, 8)) + "'");
  s.remove_prefix(static_cast<std::size_t>(ptr - begin));
  return sign * v;
}

void expect(std::string_view& s, std::string_view chars, const char* what) {
  skip_ws(s);
  if (s.empty() || chars.find(s.front()) == std::string_view::npos)
    throw DomainError(std::string("expected ") + what + " in set syntax");
  s.remove_prefix(1);
}

std::string format_endpoint(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

CoordinateSet parse_coordinate_set(std::string_view text) {
  std::vector<Interval> intervals;
  std::string_view s = text;
  for (;;) {
    expect(s, "([", "'(' or '['");
    const double lo = parse_endpoint(s);
    expect(s, ",", "','");
    const double hi = parse_endpoint(s);
    expect(s, ")]", "')' or ']'");
    intervals.push_back({lo, hi});
    skip_ws(s);
    if (s.empty()) break;
    if (s.front() == 'U' || s.front() == 'u') {
      s.remove_prefix(1);
    } else {
      throw DomainError("expected 'U' between intervals in set syntax");
    }
  }
  return CoordinateSet::normalize(std::move(intervals));
}

std::string to_string(const CoordinateSet& cs) {
  std::string out;
  bool first = true;
  for (const auto& iv : cs.intervals()) {
    if (!first) out += "U";
    first = false;
    out += std::isinf(iv.lo) ? "(" : "[";
    out += format_endpoint(iv.lo);
    out += ",";
    out += format_endpoint(iv.hi);
    out += std::isinf(iv.hi) ? ")" : "]";
  }
  return out;
}

SelectionSet SelectionSet::repeated(const CoordinateSet& cs, std::size_t q) {
  SelectionSet a;
  a.coords.assign(q, cs);
  return a;
}

bool SelectionSet::contains_point(std::span<const double> x) const {
  if (x.size() != coords.size()) throw DomainError("selection set dimension mismatch");
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!contains(coords[i], x[i])) return false;
  }
  return true;
}

}  // namespace selgauss

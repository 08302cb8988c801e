#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "stabreg/core.hpp"

namespace stabreg {

// Decay function sigma: N -> (0,1), letting the homogeneity error shrink
// with the partition size.
class DecayFn {
 public:
  enum class Kind { constant, inverse, inverse_square, exponential, table, equipartition };

  static DecayFn constant(double c) { return DecayFn(Kind::constant, c); }
  static DecayFn inverse(double c) { return DecayFn(Kind::inverse, c); }            // c / n
  static DecayFn inverse_square(double c) { return DecayFn(Kind::inverse_square, c); }  // c / n^2
  static DecayFn exponential(double c) { return DecayFn(Kind::exponential, c); }    // c * 2^-n

  // table[n-1] for n <= table.size(), fallback afterwards.
  static DecayFn table(std::vector<double> values, double fallback) {
    DecayFn d(Kind::table, fallback);
    d.table_ = std::move(values);
    for (double v : d.table_) check_value(v);
    return d;
  }

  // tau(n) = (eps / 2n) * base(4 n^2 ceil(1/eps)^2), the decay that makes a
  // chopped partition homogeneous at `base`. `base` is monotonized first.
  static DecayFn equipartition_modified(const DecayFn& base, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InputError("epsilon must lie in (0,1)");
    DecayFn d(Kind::equipartition, epsilon);
    d.base_ = std::make_shared<const DecayFn>(base.monotonized());
    return d;
  }

  Kind kind() const { return kind_; }
  double parameter() const { return c_; }
  const std::vector<double>& table_values() const { return table_; }
  const DecayFn* base() const { return base_.get(); }

  double operator()(std::size_t n) const {
    if (n == 0) throw InputError("decay functions are defined for n >= 1");
    const double x = static_cast<double>(n);
    switch (kind_) {
      case Kind::constant: return c_;
      case Kind::inverse: return c_ / x;
      case Kind::inverse_square: return c_ / (x * x);
      case Kind::exponential:
        return std::max(std::ldexp(c_, -static_cast<int>(std::min<std::size_t>(n, 1100))),
                        std::numeric_limits<double>::denorm_min());
      case Kind::table: return n <= table_.size() ? table_[n - 1] : c_;
      case Kind::equipartition: {
        const double inv = std::ceil(1.0 / c_);
        const double arg = 4.0 * x * x * inv * inv;
        const double s = (*base_)(arg >= 1.8e19 ? std::size_t(-1) : static_cast<std::size_t>(arg));
        // One final rounding keeps tau(n) * 2n / eps within an ulp of sigma.
        const double t = static_cast<double>(static_cast<long double>(c_) * s / (2.0L * static_cast<long double>(x)));
        return std::max(t, std::numeric_limits<double>::denorm_min());
      }
    }
    return c_;
  }

  // Running minimum: sigma'(n) = min_{t <= n} sigma(t). Never increases a value.
  DecayFn monotonized() const {
    if (kind_ != Kind::table) return *this;  // the closed forms are non-increasing already
    std::vector<double> t = table_;
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = std::min(t[i], t[i - 1]);
    double fb = c_;
    if (!t.empty()) fb = std::min(fb, t.back());
    DecayFn d(Kind::table, fb);
    d.table_ = std::move(t);
    return d;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::constant: return "const:" + fmt(c_);
      case Kind::inverse: return "inv:" + fmt(c_);
      case Kind::inverse_square: return "invsq:" + fmt(c_);
      case Kind::exponential: return "exp:" + fmt(c_);
      case Kind::table: return "table(" + std::to_string(table_.size()) + ",fallback " + fmt(c_) + ")";
      case Kind::equipartition: return "tau[eps=" + fmt(c_) + "](" + base_->describe() + ")";
    }
    return {};
  }

  // "const:c", "inv:c", "invsq:c" or "exp:c".
  static DecayFn parse(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw InputError("decay spec '" + text + "' must look like kind:c");
    const std::string kind = text.substr(0, colon);
    double c = 0.0;
    try {
      std::size_t used = 0;
      c = std::stod(text.substr(colon + 1), &used);
      if (used != text.size() - colon - 1) throw InputError("trailing characters");
    } catch (const std::exception&) {
      throw InputError("decay spec '" + text + "' has a malformed constant");
    }
    if (kind == "const") return constant(c);
    if (kind == "inv") return inverse(c);
    if (kind == "invsq") return inverse_square(c);
    if (kind == "exp") return exponential(c);
    throw InputError("unknown decay kind '" + kind + "'");
  }

  friend bool operator==(const DecayFn& x, const DecayFn& y) {
    if (x.kind_ != y.kind_ || x.c_ != y.c_ || x.table_ != y.table_) return false;
    if (!x.base_ || !y.base_) return x.base_ == y.base_;
    return *x.base_ == *y.base_;
  }

 private:
  DecayFn(Kind k, double c) : kind_(k), c_(c) {
    if (k != Kind::equipartition) check_value(c);
  }

  static void check_value(double v) {
    if (!(v > 0.0 && v < 1.0)) throw InputError("decay values must lie in (0,1), got " + fmt(v));
  }

  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

  Kind kind_;
  double c_;
  std::vector<double> table_;
  std::shared_ptr<const DecayFn> base_;
};

struct Params {
  double delta = 0.1;
  double epsilon = 0.1;
  double gamma = 0.1;
  std::size_t k = 2;
  DecayFn decay = DecayFn::constant(0.1);

  // 5 delta + epsilon, the homogeneity radius in the regularity statements.
  double regularity_radius() const { return 5.0 * delta + epsilon; }

  void validate() const {
    if (!(delta > 0.0 && delta <= 1.0)) throw InputError("delta must lie in (0,1]");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InputError("epsilon must lie in (0,1)");
    if (!(gamma > 0.0 && gamma < 1.0)) throw InputError("gamma must lie in (0,1)");
    if (k == 0) throw InputError("k must be positive");
  }
};

}  // namespace stabreg

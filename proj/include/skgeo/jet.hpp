#pragma once

// Forward-mode truncated Taylor arithmetic ("jets") to order 3, for real
// scalar fields on R^m and holomorphic scalar fields on C^n.  Hessian and
// third-derivative slots use packed symmetric storage, so symmetry under
// index permutation is a property of the representation.

#include <array>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "skgeo/common.hpp"

namespace skgeo {

// Packed layout: entry (i,j), i<=j, of a symmetric matrix lives at
// j(j+1)/2 + i; entry (i,j,k), i<=j<=k, of a symmetric 3-tensor lives at
// k(k+1)(k+2)/6 + j(j+1)/2 + i.
inline int sym2_size(int m) { return m * (m + 1) / 2; }
inline int sym3_size(int m) { return m * (m + 1) * (m + 2) / 6; }
inline int sym2_index(int i, int j) { return j * (j + 1) / 2 + i; }
inline int sym3_index(int i, int j, int k) {
  return k * (k + 1) * (k + 2) / 6 + j * (j + 1) / 2 + i;
}

namespace detail {

inline void sort2(int& i, int& j) {
  if (i > j) std::swap(i, j);
}
inline void sort3(int& i, int& j, int& k) {
  if (i > j) std::swap(i, j);
  if (j > k) std::swap(j, k);
  if (i > j) std::swap(i, j);
}

inline void check_log_domain(double v) {
  if (!(v > 0.0)) throw DomainError("log of nonpositive argument");
}
inline void check_log_domain(const cplx& v) {
  if (v.imag() == 0.0 && v.real() <= 0.0)
    throw DomainError("log on principal branch cut");
}
inline void check_sqrt_domain(double v) {
  if (!(v > 0.0)) throw DomainError("sqrt of nonpositive argument");
}
inline void check_sqrt_domain(const cplx& v) {
  if (v.imag() == 0.0 && v.real() <= 0.0)
    throw DomainError("sqrt on principal branch cut");
}
inline void check_inv_domain(double v) {
  if (v == 0.0) throw DomainError("division by zero");
}
inline void check_inv_domain(const cplx& v) {
  if (v == cplx(0.0, 0.0)) throw DomainError("division by zero");
}

}  // namespace detail

template <class S>
class Jet {
 public:
  using Storage = Eigen::Matrix<S, Eigen::Dynamic, 1>;

  Jet() = default;

  /// Jet of a constant field: all populated derivative slots are zero.
  static Jet constant(const S& v, int vars, int order) {
    Jet j(vars, order);
    j.value_ = v;
    return j;
  }

  /// Jet of the coordinate function x_index at the point v.
  static Jet variable(const S& v, int index, int vars, int order) {
    Jet j(vars, order);
    j.value_ = v;
    if (order >= 1) j.grad_[index] = S(1);
    return j;
  }

  int vars() const { return vars_; }
  int order() const { return order_; }

  const S& value() const { return value_; }

  const S& grad(int i) const {
    require_order(1, "gradient");
    return grad_[i];
  }
  const S& hess(int i, int j) const {
    require_order(2, "hessian");
    detail::sort2(i, j);
    return hess_[sym2_index(i, j)];
  }
  const S& third(int i, int j, int k) const {
    require_order(3, "third derivative");
    detail::sort3(i, j, k);
    return third_[sym3_index(i, j, k)];
  }

  Eigen::Matrix<S, Eigen::Dynamic, 1> grad_vector() const {
    require_order(1, "gradient");
    return grad_;
  }
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> hess_matrix() const {
    require_order(2, "hessian");
    Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> h(vars_, vars_);
    for (int j = 0; j < vars_; ++j)
      for (int i = 0; i <= j; ++i) h(i, j) = h(j, i) = hess_[sym2_index(i, j)];
    return h;
  }

  /// Copy with the value slot replaced (derivative slots untouched).
  Jet with_value(const S& v) const {
    Jet j = *this;
    j.value_ = v;
    return j;
  }

  Jet operator-() const {
    Jet r = *this;
    r.value_ = -r.value_;
    r.grad_ = -r.grad_;
    r.hess_ = -r.hess_;
    r.third_ = -r.third_;
    return r;
  }

  Jet& operator+=(const Jet& o) {
    match(o);
    value_ += o.value_;
    grad_ += o.grad_;
    hess_ += o.hess_;
    third_ += o.third_;
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    match(o);
    value_ -= o.value_;
    grad_ -= o.grad_;
    hess_ -= o.hess_;
    third_ -= o.third_;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }

  // Truncated Leibniz product.
  friend Jet operator*(const Jet& a, const Jet& b) {
    a.match(b);
    const int m = a.vars_;
    Jet r(m, std::min(a.order_, b.order_));
    r.value_ = a.value_ * b.value_;
    if (r.order_ >= 1) {
      for (int i = 0; i < m; ++i)
        r.grad_[i] = a.value_ * b.grad_[i] + b.value_ * a.grad_[i];
    }
    if (r.order_ >= 2) {
      for (int j = 0; j < m; ++j)
        for (int i = 0; i <= j; ++i) {
          const int ij = sym2_index(i, j);
          r.hess_[ij] = a.value_ * b.hess_[ij] + b.value_ * a.hess_[ij] +
                        a.grad_[i] * b.grad_[j] + a.grad_[j] * b.grad_[i];
        }
    }
    if (r.order_ >= 3) {
      for (int k = 0; k < m; ++k)
        for (int j = 0; j <= k; ++j)
          for (int i = 0; i <= j; ++i) {
            const int jk = sym2_index(j, k), ik = sym2_index(i, k),
                      ij = sym2_index(i, j);
            r.third_[sym3_index(i, j, k)] =
                a.value_ * b.third_[sym3_index(i, j, k)] +
                b.value_ * a.third_[sym3_index(i, j, k)] +
                a.grad_[i] * b.hess_[jk] + a.grad_[j] * b.hess_[ik] +
                a.grad_[k] * b.hess_[ij] + b.grad_[i] * a.hess_[jk] +
                b.grad_[j] * a.hess_[ik] + b.grad_[k] * a.hess_[ij];
          }
    }
    return r;
  }

  friend Jet operator/(const Jet& a, const Jet& b) { return a * inv(b); }

  // Scalar operand variants.  T is anything convertible to the scalar
  // type (so double constants work with complex jets).
  template <class T>
    requires std::convertible_to<T, S>
  friend Jet operator+(Jet a, const T& s) {
    a.value_ += S(s);
    return a;
  }
  template <class T>
    requires std::convertible_to<T, S>
  friend Jet operator+(const T& s, Jet a) {
    a.value_ += S(s);
    return a;
  }
  template <class T>
    requires std::convertible_to<T, S>
  friend Jet operator-(Jet a, const T& s) {
    a.value_ -= S(s);
    return a;
  }
  template <class T>
    requires std::convertible_to<T, S>
  friend Jet operator-(const T& s, const Jet& a) {
    Jet r = -a;
    r.value_ += S(s);
    return r;
  }
  template <class T>
    requires std::convertible_to<T, S>
  friend Jet operator*(Jet a, const T& s) {
    a.scale(S(s));
    return a;
  }
  template <class T>
    requires std::convertible_to<T, S>
  friend Jet operator*(const T& s, Jet a) {
    a.scale(S(s));
    return a;
  }
  template <class T>
    requires std::convertible_to<T, S>
  friend Jet operator/(Jet a, const T& s) {
    detail::check_inv_domain(S(s));
    a.scale(S(1) / S(s));
    return a;
  }
  template <class T>
    requires std::convertible_to<T, S>
  friend Jet operator/(const T& s, const Jet& a) {
    return inv(a) * S(s);
  }

  /// Composition with a univariate function: d holds f^(k) at the jet's
  /// value for k = 0..order; higher entries are ignored.
  friend Jet apply_univariate(const Jet& u, const std::array<S, 4>& d) {
    Jet delta = u.with_value(S(0));
    Jet r = Jet::constant(u.order_ >= 3 ? d[3] / S(6) : S(0), u.vars_, u.order_);
    if (u.order_ >= 2) r = r * delta + d[2] / S(2);
    r = r * delta + d[1];
    r = r * delta + d[0];
    return r;
  }

  friend Jet inv(const Jet& u) {
    detail::check_inv_domain(u.value_);
    const S v = u.value_;
    std::array<S, 4> d{S(1) / v, S(0), S(0), S(0)};
    for (int k = 1; k <= u.order_; ++k) d[k] = -d[k - 1] * S(k) / v;
    return apply_univariate(u, d);
  }

  friend Jet exp(const Jet& u) {
    using std::exp;
    const S e = exp(u.value_);
    return apply_univariate(u, {e, e, e, e});
  }

  friend Jet log(const Jet& u) {
    using std::log;
    detail::check_log_domain(u.value_);
    const S v = u.value_;
    std::array<S, 4> d{log(v), S(0), S(0), S(0)};
    if (u.order_ >= 1) d[1] = S(1) / v;
    if (u.order_ >= 2) d[2] = -d[1] / v;
    if (u.order_ >= 3) d[3] = S(2) * d[1] / (v * v);
    return apply_univariate(u, d);
  }

  friend Jet sqrt(const Jet& u) {
    using std::sqrt;
    detail::check_sqrt_domain(u.value_);
    const S v = u.value_;
    const S s = sqrt(v);
    std::array<S, 4> d{s, S(0), S(0), S(0)};
    if (u.order_ >= 1) d[1] = S(0.5) / s;
    if (u.order_ >= 2) d[2] = -S(0.5) * d[1] / v;
    if (u.order_ >= 3) d[3] = -S(1.5) * d[2] / v;
    return apply_univariate(u, d);
  }

  /// Integer power by repeated multiplication (exact on polynomials,
  /// well-defined at zero for nonnegative exponents).
  friend Jet ipow(const Jet& u, int k) {
    if (k == 0) return Jet::constant(S(1), u.vars_, u.order_);
    Jet base = k < 0 ? inv(u) : u;
    long e = k < 0 ? -static_cast<long>(k) : k;
    Jet acc = base;
    --e;
    while (e > 0) {
      if (e & 1) {
        acc = acc * base;
        --e;
      } else {
        base = base * base;
        e >>= 1;
      }
    }
    return acc;
  }

 private:
  Jet(int vars, int order) : vars_(vars), order_(order), value_(S(0)) {
    if (order >= 1) grad_ = Storage::Zero(vars);
    if (order >= 2) hess_ = Storage::Zero(sym2_size(vars));
    if (order >= 3) third_ = Storage::Zero(sym3_size(vars));
  }

  void require_order(int k, const char* slot) const {
    if (order_ < k)
      throw std::logic_error(std::string("jet ") + slot +
                             " not populated at order " + std::to_string(order_));
  }

  void match(const Jet& o) const {
    if (vars_ != o.vars_ || order_ != o.order_)
      throw DimensionMismatch("jet operands disagree in vars/order");
  }

  void scale(const S& s) {
    value_ *= s;
    grad_ *= s;
    hess_ *= s;
    third_ *= s;
  }

  int vars_ = 0;
  int order_ = 0;
  S value_{};
  Storage grad_, hess_, third_;
};

using RJet = Jet<double>;
using CJet = Jet<cplx>;

/// Complex numbers over a commutative coefficient ring T (used with
/// T = Jet<double> to push real-variable jets through complex formulas).
template <class T>
struct ComplexOver {
  T re, im;

  cplx value() const { return cplx(re.value(), im.value()); }

  static ComplexOver constant_like(const cplx& c, const ComplexOver& proto) {
    const int m = proto.re.vars(), p = proto.re.order();
    return {T::constant(c.real(), m, p), T::constant(c.imag(), m, p)};
  }

  ComplexOver operator-() const { return {-re, -im}; }

  friend ComplexOver operator+(const ComplexOver& a, const ComplexOver& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend ComplexOver operator-(const ComplexOver& a, const ComplexOver& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend ComplexOver operator*(const ComplexOver& a, const ComplexOver& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend ComplexOver operator/(const ComplexOver& a, const ComplexOver& b) {
    detail::check_inv_domain(b.value());
    T norm = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / norm,
            (a.im * b.re - a.re * b.im) / norm};
  }

  friend ComplexOver operator*(const ComplexOver& a, const cplx& c) {
    return {a.re * c.real() - a.im * c.imag(),
            a.re * c.imag() + a.im * c.real()};
  }
  friend ComplexOver operator+(ComplexOver a, const cplx& c) {
    a.re = a.re + c.real();
    a.im = a.im + c.imag();
    return a;
  }

  friend ComplexOver apply_univariate(const ComplexOver& u,
                                      const std::array<cplx, 4>& d) {
    const int p = u.re.order();
    ComplexOver delta{u.re.with_value(0.0), u.im.with_value(0.0)};
    ComplexOver r = constant_like(p >= 3 ? d[3] / 6.0 : cplx(0), u);
    if (p >= 2) r = r * delta + d[2] / 2.0;
    r = r * delta + d[1];
    r = r * delta + d[0];
    return r;
  }

  friend ComplexOver exp(const ComplexOver& u) {
    const cplx e = std::exp(u.value());
    return apply_univariate(u, {e, e, e, e});
  }
  friend ComplexOver log(const ComplexOver& u) {
    detail::check_log_domain(u.value());
    const cplx v = u.value();
    return apply_univariate(
        u, {std::log(v), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)});
  }
  friend ComplexOver sqrt(const ComplexOver& u) {
    detail::check_sqrt_domain(u.value());
    const cplx v = u.value();
    const cplx s = std::sqrt(v);
    return apply_univariate(
        u, {s, 0.5 / s, -0.25 / (s * v), 0.375 / (s * v * v)});
  }
  friend ComplexOver ipow(const ComplexOver& u, int k) {
    if (k == 0) return constant_like(cplx(1.0), u);
    ComplexOver base = u;
    if (k < 0) base = constant_like(cplx(1.0), u) / u;
    long e = std::abs(static_cast<long>(k));
    ComplexOver acc = base;
    --e;
    while (e > 0) {
      if (e & 1) {
        acc = acc * base;
        --e;
      } else {
        base = base * base;
        e >>= 1;
      }
    }
    return acc;
  }
};

using CRJet = ComplexOver<RJet>;

/// Seed one jet variable per coordinate of x.
inline std::vector<RJet> jet_variables(const Vec& x, int order) {
  const int m = static_cast<int>(x.size());
  std::vector<RJet> vars;
  vars.reserve(m);
  for (int i = 0; i < m; ++i)
    vars.push_back(RJet::variable(x[i], i, m, order));
  return vars;
}

inline std::vector<CJet> jet_variables(const CVec& w, int order) {
  const int n = static_cast<int>(w.size());
  std::vector<CJet> vars;
  vars.reserve(n);
  for (int i = 0; i < n; ++i)
    vars.push_back(CJet::variable(w[i], i, n, order));
  return vars;
}

/// Taylor data of a real scalar field at x, to the requested order.
/// The evaluator is any callable accepting std::vector<Jet<double>>
/// (and, for finite-difference cross-checks, std::vector<double>).
template <class F>
RJet real_jet(F&& f, const Vec& x, int order) {
  return f(jet_variables(x, order));
}

namespace detail {

template <class F>
double plain_eval(F&& f, const Vec& x) {
  std::vector<double> v(x.data(), x.data() + x.size());
  return f(v);
}

}  // namespace detail

/// Independent finite-difference cross-check of a jet.  The gradient is
/// compared against central differences of plain values; the Hessian
/// against central differences of first-order jet gradients.  Returns
/// the largest componentwise deviation; the caller judges it.
template <class F>
double fd_check(F&& f, const Vec& x, double step) {
  const int m = static_cast<int>(x.size());
  const RJet jet = real_jet(f, x, 2);
  double worst = 0.0;
  for (int i = 0; i < m; ++i) {
    Vec xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    const double fd =
        (detail::plain_eval(f, xp) - detail::plain_eval(f, xm)) / (2.0 * step);
    worst = std::max(worst, std::abs(jet.grad(i) - fd));
    const RJet gp = real_jet(f, xp, 1);
    const RJet gm = real_jet(f, xm, 1);
    for (int j = 0; j < m; ++j) {
      const double hd = (gp.grad(j) - gm.grad(j)) / (2.0 * step);
      worst = std::max(worst, std::abs(jet.hess(i, j) - hd));
    }
  }
  return worst;
}

}  // namespace skgeo

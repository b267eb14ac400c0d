#pragma once

#include <array>
#include <cmath>

namespace phplate {

/// Second-order jet of a scalar field in `Dim` variables: value, gradient and
/// symmetric Hessian. Arithmetic propagates all three exactly, so analytic
/// test fields get exact first and second derivatives.
template <int Dim>
struct Jet {
  double v = 0.0;
  std::array<double, Dim> g{};
  std::array<std::array<double, Dim>, Dim> h{};

  static Jet constant(double c) {
    Jet j;
    j.v = c;
    return j;
  }
  static Jet variable(double value, int index) {
    Jet j;
    j.v = value;
    j.g[index] = 1.0;
    return j;
  }

  double d(int i) const { return g[i]; }
  double dd(int i, int k) const { return h[i][k]; }

  Jet& operator+=(const Jet& o) {
    v += o.v;
    for (int i = 0; i < Dim; ++i) {
      g[i] += o.g[i];
      for (int k = 0; k < Dim; ++k) h[i][k] += o.h[i][k];
    }
    return *this;
  }
  Jet& operator-=(const Jet& o) { return *this += -o; }
  Jet& operator*=(double s) {
    v *= s;
    for (int i = 0; i < Dim; ++i) {
      g[i] *= s;
      for (int k = 0; k < Dim; ++k) h[i][k] *= s;
    }
    return *this;
  }

  Jet operator-() const {
    Jet r = *this;
    r *= -1.0;
    return r;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator+(Jet a, double s) {
    a.v += s;
    return a;
  }
  friend Jet operator+(double s, Jet a) { return a + s; }
  friend Jet operator-(Jet a, double s) { return a + (-s); }
  friend Jet operator-(double s, const Jet& a) { return (-a) + s; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    r.v = a.v * b.v;
    for (int i = 0; i < Dim; ++i) {
      r.g[i] = a.g[i] * b.v + a.v * b.g[i];
      for (int k = 0; k < Dim; ++k)
        r.h[i][k] = a.h[i][k] * b.v + a.g[i] * b.g[k] + a.g[k] * b.g[i] + a.v * b.h[i][k];
    }
    return r;
  }

  /// Composition f(a) given f, f', f'' at a.v.
  Jet compose(double f0, double f1, double f2) const {
    Jet r;
    r.v = f0;
    for (int i = 0; i < Dim; ++i) {
      r.g[i] = f1 * g[i];
      for (int k = 0; k < Dim; ++k) r.h[i][k] = f1 * h[i][k] + f2 * g[i] * g[k];
    }
    return r;
  }
};

using Jet1 = Jet<1>;
using Jet2 = Jet<2>;

template <int Dim>
Jet<Dim> exp(const Jet<Dim>& a) {
  const double e = std::exp(a.v);
  return a.compose(e, e, e);
}

template <int Dim>
Jet<Dim> sin(const Jet<Dim>& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return a.compose(s, c, -s);
}

template <int Dim>
Jet<Dim> cos(const Jet<Dim>& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return a.compose(c, -s, -c);
}

template <int Dim>
Jet<Dim> inverse(const Jet<Dim>& a) {
  const double r = 1.0 / a.v;
  return a.compose(r, -r * r, 2.0 * r * r * r);
}

template <int Dim>
Jet<Dim> pow(const Jet<Dim>& a, int n) {
  if (n < 0) return pow(inverse(a), -n);
  if (n == 0) return Jet<Dim>::constant(1.0);
  if (n == 1) return a;
  const double f0 = std::pow(a.v, n);
  const double f1 = n * std::pow(a.v, n - 1);
  const double f2 = n * (n - 1) * std::pow(a.v, n - 2);
  return a.compose(f0, f1, f2);
}

}  // namespace phplate

// Copyright 2026 The zoopt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ZOOPT_DUAL_HPP_
#define ZOOPT_DUAL_HPP_

#include <cmath>

#include <Eigen/Core>

namespace zoopt {

// Forward-mode dual number val + der * e with e^2 = 0. Evaluating a function
// on Dual(x, u) yields f(x) and the directional derivative u^T grad f(x).
template <typename T>
struct Dual {
  T val = T(0);
  T der = T(0);

  Dual() = default;
  Dual(T v) : val(v) {}  // NOLINT: implicit so constants mix in freely.
  Dual(T v, T d) : val(v), der(d) {}

  Dual& operator+=(const Dual& o) {
    val += o.val;
    der += o.der;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    val -= o.val;
    der -= o.der;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    der = der * o.val + val * o.der;
    val *= o.val;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    der = (der * o.val - val * o.der) / (o.val * o.val);
    val /= o.val;
    return *this;
  }
};

template <typename T>
Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <typename T>
Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }
template <typename T>
Dual<T> operator*(Dual<T> a, const Dual<T>& b) { return a *= b; }
template <typename T>
Dual<T> operator/(Dual<T> a, const Dual<T>& b) { return a /= b; }
template <typename T>
Dual<T> operator-(const Dual<T>& a) { return {-a.val, -a.der}; }

template <typename T>
Dual<T> operator+(Dual<T> a, T b) { return a += Dual<T>(b); }
template <typename T>
Dual<T> operator+(T a, const Dual<T>& b) { return Dual<T>(a) + b; }
template <typename T>
Dual<T> operator-(Dual<T> a, T b) { return a -= Dual<T>(b); }
template <typename T>
Dual<T> operator-(T a, const Dual<T>& b) { return Dual<T>(a) - b; }
template <typename T>
Dual<T> operator*(const Dual<T>& a, T b) { return {a.val * b, a.der * b}; }
template <typename T>
Dual<T> operator*(T a, const Dual<T>& b) { return {a * b.val, a * b.der}; }
template <typename T>
Dual<T> operator/(const Dual<T>& a, T b) { return {a.val / b, a.der / b}; }
template <typename T>
Dual<T> operator/(T a, const Dual<T>& b) { return Dual<T>(a) / b; }

template <typename T>
bool operator<(const Dual<T>& a, const Dual<T>& b) { return a.val < b.val; }
template <typename T>
bool operator>(const Dual<T>& a, const Dual<T>& b) { return a.val > b.val; }
template <typename T>
bool operator<=(const Dual<T>& a, const Dual<T>& b) { return a.val <= b.val; }
template <typename T>
bool operator>=(const Dual<T>& a, const Dual<T>& b) { return a.val >= b.val; }
template <typename T>
bool operator==(const Dual<T>& a, const Dual<T>& b) { return a.val == b.val; }
template <typename T>
bool operator!=(const Dual<T>& a, const Dual<T>& b) { return a.val != b.val; }

template <typename T>
Dual<T> exp(const Dual<T>& a) {
  const T e = std::exp(a.val);
  return {e, e * a.der};
}
template <typename T>
Dual<T> log(const Dual<T>& a) { return {std::log(a.val), a.der / a.val}; }
template <typename T>
Dual<T> log1p(const Dual<T>& a) {
  return {std::log1p(a.val), a.der / (T(1) + a.val)};
}
template <typename T>
Dual<T> tanh(const Dual<T>& a) {
  const T t = std::tanh(a.val);
  return {t, (T(1) - t * t) * a.der};
}
template <typename T>
Dual<T> sqrt(const Dual<T>& a) {
  const T s = std::sqrt(a.val);
  return {s, a.der / (T(2) * s)};
}
template <typename T>
Dual<T> abs(const Dual<T>& a) { return a.val < T(0) ? -a : a; }

// Scalar helpers shared by templated model code.
inline double Value(double x) { return x; }
template <typename T>
T Value(const Dual<T>& x) { return x.val; }

}  // namespace zoopt

namespace Eigen {

template <typename T>
struct NumTraits<zoopt::Dual<T>> : GenericNumTraits<zoopt::Dual<T>> {
  using Real = zoopt::Dual<T>;
  using NonInteger = zoopt::Dual<T>;
  using Literal = zoopt::Dual<T>;
  using Nested = zoopt::Dual<T>;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2,
    AddCost = 2,
    MulCost = 3,
  };
  static Real epsilon() { return Real(NumTraits<T>::epsilon()); }
  static Real dummy_precision() { return Real(NumTraits<T>::dummy_precision()); }
  static Real highest() { return Real(NumTraits<T>::highest()); }
  static Real lowest() { return Real(NumTraits<T>::lowest()); }
  static int digits10() { return NumTraits<T>::digits10(); }
};

template <typename T, typename BinaryOp>
struct ScalarBinaryOpTraits<zoopt::Dual<T>, T, BinaryOp> {
  using ReturnType = zoopt::Dual<T>;
};

template <typename T, typename BinaryOp>
struct ScalarBinaryOpTraits<T, zoopt::Dual<T>, BinaryOp> {
  using ReturnType = zoopt::Dual<T>;
};

}  // namespace Eigen

#endif  // ZOOPT_DUAL_HPP_

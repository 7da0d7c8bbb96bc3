#include "dualext/types.hpp"

#include <cmath>
#include <cstdio>

namespace dualext {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::grid_mismatch: return "grid_mismatch";
    case ErrorCode::out_of_form_domain: return "out_of_form_domain";
    case ErrorCode::not_in_range: return "not_in_range";
    case ErrorCode::support_violation: return "support_violation";
    case ErrorCode::degenerate_gram: return "degenerate_gram";
    case ErrorCode::not_positive_definite: return "not_positive_definite";
    case ErrorCode::not_dissipative_input: return "not_dissipative_input";
    case ErrorCode::unsupported_family: return "unsupported_family";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

Formula Formula::constant(Complex c) {
  Formula f;
  f.value = [c](double) { return c; };
  f.first = [](double) { return Complex{}; };
  f.second = [](double) { return Complex{}; };
  return f;
}

namespace {

template <class Op>
std::function<Complex(double)> combine(const std::function<Complex(double)>& a,
                                       const std::function<Complex(double)>& b, Op op) {
  if (!a || !b) return {};
  return [a, b, op](double x) { return op(a(x), b(x)); };
}

}  // namespace

Formula operator+(const Formula& a, const Formula& b) {
  auto add = [](Complex p, Complex q) { return p + q; };
  return {combine(a.value, b.value, add), combine(a.first, b.first, add),
          combine(a.second, b.second, add)};
}

Formula operator-(const Formula& a, const Formula& b) {
  auto sub = [](Complex p, Complex q) { return p - q; };
  return {combine(a.value, b.value, sub), combine(a.first, b.first, sub),
          combine(a.second, b.second, sub)};
}

Formula operator*(Complex s, const Formula& a) {
  auto scale = [s](const std::function<Complex(double)>& f) -> std::function<Complex(double)> {
    if (!f) return {};
    return [s, f](double x) { return s * f(x); };
  };
  return {scale(a.value), scale(a.first), scale(a.second)};
}

Complex ExtendedComplex::value() const {
  if (infinite_) throw Error(ErrorCode::invalid_argument, "boundary parameter is infinite");
  return value_;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_complex(Complex z) {
  std::string out = format_double(z.real());
  const double im = z.imag();
  if (im == 0.0 && !std::signbit(im)) return out;
  out += (std::signbit(im) ? "-" : "+");
  out += format_double(std::abs(im));
  out += "i";
  return out;
}

std::string format_extended(const ExtendedComplex& z) {
  return z.is_infinite() ? std::string("inf") : format_complex(z.value());
}

}  // namespace dualext

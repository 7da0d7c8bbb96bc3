#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>

namespace dualext {

using Complex = std::complex<double>;

inline constexpr Complex kI{0.0, 1.0};

/// Machine-readable failure categories. Every exception thrown by the library
/// carries one of these so the CLI can map it onto an exit status.
enum class ErrorCode {
  invalid_argument,
  grid_mismatch,
  out_of_form_domain,
  not_in_range,
  support_violation,
  degenerate_gram,
  not_positive_definite,
  not_dissipative_input,
  unsupported_family,
  parse_error,
  io_error,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// A complex function of one real variable together with (optionally) its
/// first two derivatives in closed form. Empty members mean "not known".
struct Formula {
  std::function<Complex(double)> value;
  std::function<Complex(double)> first;
  std::function<Complex(double)> second;

  bool has_value() const { return static_cast<bool>(value); }
  bool has_first() const { return static_cast<bool>(first); }
  bool has_second() const { return static_cast<bool>(second); }

  static Formula constant(Complex c);
  static Formula zero() { return constant(0.0); }
};

Formula operator+(const Formula& a, const Formula& b);
Formula operator-(const Formula& a, const Formula& b);
Formula operator*(Complex s, const Formula& a);

/// An element of C u {infinity}; used for boundary parameters.
class ExtendedComplex {
 public:
  ExtendedComplex() = default;
  ExtendedComplex(Complex z) : value_(z) {}  // NOLINT(implicit)
  ExtendedComplex(double x) : value_(x) {}   // NOLINT(implicit)

  static ExtendedComplex infinity() {
    ExtendedComplex e;
    e.infinite_ = true;
    return e;
  }

  bool is_infinite() const { return infinite_; }
  Complex value() const;

  /// Imaginary part with the convention Im(infinity) = 0.
  double imag() const { return infinite_ ? 0.0 : value_.imag(); }

  bool operator==(const ExtendedComplex& o) const {
    return infinite_ == o.infinite_ && (infinite_ || value_ == o.value_);
  }

 private:
  Complex value_{0.0, 0.0};
  bool infinite_ = false;
};

std::string format_double(double x);
std::string format_complex(Complex z);
std::string format_extended(const ExtendedComplex& z);

}  // namespace dualext

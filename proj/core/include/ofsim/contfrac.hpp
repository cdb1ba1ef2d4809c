#ifndef OFSIM_CONTFRAC_HPP
#define OFSIM_CONTFRAC_HPP

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ofsim/group_crypto.hpp"
#include "ofsim/random.hpp"

namespace ofsim::contfrac {

/// Default working precision in decimal digits. Windows are re-verified at
/// twice the working precision; instability doubles it (up to three times)
/// before giving up with PrecisionError.
inline constexpr int kDefaultDigits = 256;
inline constexpr int kMinDigits = 64;

/// Positive real with an explicit working precision and a provenance
/// expression from which it can be re-evaluated at any precision.
///
/// Supported expressions: P/Q, sqrt(D), golden, root(R,log(N)), and
/// quotient-chain compositions produced by multi_continuation.
class PreciseReal {
 public:
  static PreciseReal rational(mpz_class num, mpz_class den,
                              int digits = kDefaultDigits);
  static PreciseReal sqrt_int(unsigned long d, int digits = kDefaultDigits);
  /// (1 + sqrt(5)) / 2.
  static PreciseReal golden(int digits = kDefaultDigits);
  /// r-th root of ln(n); requires n >= 2 (InvalidNonce) and r >= 3.
  static PreciseReal root_of_log(const mpz_class& n, unsigned r,
                                 int digits = kDefaultDigits);
  /// [head[0]; head[1], ..., head[k-1], tail]: folds the quotient chain in
  /// front of the tail value. Every head entry after the first must be >= 1.
  static PreciseReal composed(std::vector<std::uint64_t> head, PreciseReal tail);

  /// Parses the provenance grammar ("7/3", "sqrt(2)", "golden",
  /// "root(3,log(10))"); throws InvalidArgument on anything else.
  static PreciseReal parse_expression(const std::string& expr,
                                      int digits = kDefaultDigits);

  int working_digits() const { return digits_; }
  PreciseReal with_digits(int digits) const;

  bool is_rational() const;
  std::string provenance() const;

  /// Decimal rendering at the working precision (for diagnostics).
  std::string decimal(int digits) const;

  struct Expr;  // internal expression node

 private:
  PreciseReal(std::shared_ptr<const Expr> expr, int digits);
  std::shared_ptr<const Expr> expr_;
  int digits_;

  friend struct ExpandAccess;
};

/// A verified window of a continued-fraction expansion. `offset` counts
/// quotients skipped from the start of the full expansion (the integer part
/// has index 0). `terminated` marks a rational expansion that ended inside
/// the window, in which case fewer than the requested quotients are present.
struct PartialQuotients {
  std::vector<std::uint64_t> quotients;
  std::size_t offset = 0;
  int stable_precision = 0;  // decimal digits at which the window verified
  bool terminated = false;

  friend bool operator==(const PartialQuotients&, const PartialQuotients&) = default;
};

/// First `count` partial quotients of x (classical floor/subtract/reciprocate
/// expansion). Halts early iff x is rational at working precision. Every
/// window is recomputed at twice the precision; a mismatch doubles the
/// working precision and retries, up to three doublings (PrecisionError).
PartialQuotients cf_expand(const PreciseReal& x, std::size_t count);

/// Quotients q[skip] .. q[skip+count-1] of the expansion of x.
PartialQuotients cf_window(const PreciseReal& x, std::size_t skip, std::size_t count);

/// r-th root of ln(N) at >= 256 digits; the transcendental the FC challenge
/// is cut from. N <= 1 -> InvalidNonce; r < 3 -> InvalidArgument.
PreciseReal transcendental_from_nonce(const mpz_class& n, unsigned r,
                                      int digits = kDefaultDigits);

/// Constructs k distinct reals [r_1..r_m, window..., theta_j] with random
/// integer prefixes and random quadratic-irrational tails; each re-expands
/// to contain `window` starting at its prefix length. Requires k >= 2 and a
/// window of entries >= 1.
std::vector<PreciseReal> multi_continuation(const PartialQuotients& window,
                                            std::size_t k, RandomSource& rng);

/// Nine partial quotients of cbrt(ln(N)) at an offset bound to the ordered
/// key pair: binding = SHA-256(ser(key_a) || ser(key_b)), offset
/// m = 2 + (first two binding bytes as a big-endian integer mod 64), window
/// = q[m]..q[m+8]. Key order matters.
struct FcChallenge {
  PartialQuotients quotients;
  crypto::Digest binding{};

  /// Transport form: nine 8-byte big-endian quotients (72 bytes).
  std::array<std::uint8_t, 72> encode() const;
  static std::optional<FcChallenge> decode(ByteView wire);  // quotients only

  friend bool operator==(const FcChallenge&, const FcChallenge&) = default;
};

FcChallenge derive_fc(const mpz_class& nonce, const crypto::GroupElement& key_a,
                      const crypto::GroupElement& key_b,
                      int digits = kDefaultDigits);

/// Smallest period p such that quotients[1..] repeats with period p, with at
/// least two full periods visible in the window; nullopt if none.
std::optional<std::size_t> detect_period(const std::vector<std::uint64_t>& quotients);

/// Golden CF fixture line: "expression ; precision ; q0,q1,...".
struct CfFixture {
  std::string expression;
  int precision = 0;
  std::vector<std::uint64_t> quotients;
};

std::vector<CfFixture> parse_fixture_lines(const std::string& text);
std::string format_fixture(const CfFixture& f);

}  // namespace ofsim::contfrac

#endif

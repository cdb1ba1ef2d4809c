#include "ofsim/contfrac.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace ofsim::contfrac {

namespace {

// RAII mpfr value; move-only.
class Real {
 public:
  explicit Real(mpfr_prec_t bits) { mpfr_init2(v_, bits); mpfr_set_zero(v_, 1); }
  ~Real() {
    if (live_) mpfr_clear(v_);
  }
  Real(const Real&) = delete;
  Real& operator=(const Real&) = delete;
  Real(Real&& o) noexcept {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_swap(v_, o.v_);
  }
  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

 private:
  mpfr_t v_;
  bool live_ = true;
};

mpfr_prec_t digits_to_bits(int digits) {
  return static_cast<mpfr_prec_t>(std::ceil(digits * 3.3219280948873623)) + 64;
}

bool is_perfect_square(unsigned long n) {
  auto r = static_cast<unsigned long>(std::sqrt(static_cast<double>(n)));
  for (unsigned long c = r > 0 ? r - 1 : 0; c <= r + 1; ++c)
    if (c * c == n) return true;
  return false;
}

}  // namespace

struct PreciseReal::Expr {
  enum class Kind { Rational, Sqrt, Golden, RootOfLog, Composed };
  Kind kind = Kind::Rational;
  mpz_class num = 0;
  mpz_class den = 1;
  unsigned long sqrt_arg = 0;
  mpz_class log_arg = 0;
  unsigned root = 0;
  std::vector<std::uint64_t> head;
  std::shared_ptr<const Expr> tail;
};

namespace {

using Expr = PreciseReal::Expr;

Real eval(const Expr& e, mpfr_prec_t bits) {
  switch (e.kind) {
    case Expr::Kind::Rational: {
      Real v(bits);
      mpq_class q(e.num, e.den);
      q.canonicalize();
      mpfr_set_q(v.get(), q.get_mpq_t(), MPFR_RNDN);
      return v;
    }
    case Expr::Kind::Sqrt: {
      Real v(bits);
      mpfr_sqrt_ui(v.get(), e.sqrt_arg, MPFR_RNDN);
      return v;
    }
    case Expr::Kind::Golden: {
      Real v(bits);
      mpfr_sqrt_ui(v.get(), 5, MPFR_RNDN);
      mpfr_add_ui(v.get(), v.get(), 1, MPFR_RNDN);
      mpfr_div_ui(v.get(), v.get(), 2, MPFR_RNDN);
      return v;
    }
    case Expr::Kind::RootOfLog: {
      Real v(bits);
      mpfr_set_z(v.get(), e.log_arg.get_mpz_t(), MPFR_RNDN);
      mpfr_log(v.get(), v.get(), MPFR_RNDN);
      mpfr_rootn_ui(v.get(), v.get(), e.root, MPFR_RNDN);
      return v;
    }
    case Expr::Kind::Composed: {
      // Guard bits cover the loss across the fold.
      mpfr_prec_t inner = bits + 64 + 8 * static_cast<mpfr_prec_t>(e.head.size());
      Real v = eval(*e.tail, inner);
      Real acc(inner);
      mpfr_set(acc.get(), v.get(), MPFR_RNDN);
      for (auto it = e.head.rbegin(); it != e.head.rend(); ++it) {
        mpfr_ui_div(acc.get(), 1, acc.get(), MPFR_RNDN);
        mpfr_add_ui(acc.get(), acc.get(), static_cast<unsigned long>(*it), MPFR_RNDN);
      }
      return acc;
    }
  }
  throw Error("unreachable expression kind");
}

struct RawExpansion {
  std::vector<mpz_class> q;
  bool terminated = false;
};

RawExpansion expand_float(const Expr& e, int digits, std::size_t count) {
  const mpfr_prec_t bits = digits_to_bits(digits);
  Real v = eval(e, bits);
  if (mpfr_sgn(v.get()) < 0) throw InvalidArgument("expansion requires x >= 0");

  RawExpansion out;
  Real frac(mpfr_get_prec(v.get()));
  const mpfr_exp_t floor_exp = -static_cast<mpfr_exp_t>(bits / 2);
  while (out.q.size() < count) {
    mpz_class a;
    mpfr_get_z(a.get_mpz_t(), v.get(), MPFR_RNDD);
    out.q.push_back(a);
    mpfr_sub_z(frac.get(), v.get(), a.get_mpz_t(), MPFR_RNDN);
    // Residual at or below the working noise floor: rational at this precision.
    if (mpfr_zero_p(frac.get()) || mpfr_get_exp(frac.get()) < floor_exp) {
      out.terminated = true;
      break;
    }
    mpfr_ui_div(v.get(), 1, frac.get(), MPFR_RNDN);
  }
  return out;
}

RawExpansion expand_rational(mpz_class num, mpz_class den, std::size_t count) {
  if (den == 0) throw InvalidArgument("zero denominator");
  if (num < 0 || den < 0) throw InvalidArgument("expansion requires x >= 0");
  RawExpansion out;
  while (den != 0 && out.q.size() < count) {
    mpz_class a, r;
    mpz_fdiv_qr(a.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    out.q.push_back(a);
    num = den;
    den = r;
  }
  out.terminated = (den == 0);
  return out;
}

std::uint64_t to_u64_quotient(const mpz_class& a) {
  if (a < 0 || !a.fits_ulong_p() ||
      a.get_ui() > static_cast<unsigned long>(INT64_MAX))
    throw InvalidArgument("partial quotient exceeds the 2^63-1 transport bound");
  return static_cast<std::uint64_t>(a.get_ui());
}

PartialQuotients slice_window(const RawExpansion& raw, std::size_t skip,
                              std::size_t count, int stable_digits) {
  PartialQuotients w;
  w.offset = skip;
  w.stable_precision = stable_digits;
  w.terminated = raw.terminated;
  for (std::size_t i = skip; i < raw.q.size() && i < skip + count; ++i)
    w.quotients.push_back(to_u64_quotient(raw.q[i]));
  if (!raw.terminated && w.quotients.size() < count)
    throw Error("expansion shorter than requested without termination");
  return w;
}

}  // namespace

// ---------------------------------------------------------------------------
// PreciseReal factories

PreciseReal::PreciseReal(std::shared_ptr<const Expr> expr, int digits)
    : expr_(std::move(expr)), digits_(std::max(digits, kMinDigits)) {}

PreciseReal PreciseReal::rational(mpz_class num, mpz_class den, int digits) {
  if (den == 0) throw InvalidArgument("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  if (num < 0) throw InvalidArgument("negative rational");
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Rational;
  e->num = std::move(num);
  e->den = std::move(den);
  return PreciseReal(std::move(e), digits);
}

PreciseReal PreciseReal::sqrt_int(unsigned long d, int digits) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Sqrt;
  e->sqrt_arg = d;
  return PreciseReal(std::move(e), digits);
}

PreciseReal PreciseReal::golden(int digits) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Golden;
  return PreciseReal(std::move(e), digits);
}

PreciseReal PreciseReal::root_of_log(const mpz_class& n, unsigned r, int digits) {
  if (n <= 1) throw InvalidNonce("nonce must be >= 2 so that log(N) > 0");
  if (r < 3) throw InvalidArgument("root must be >= 3");
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::RootOfLog;
  e->log_arg = n;
  e->root = r;
  return PreciseReal(std::move(e), digits);
}

PreciseReal PreciseReal::composed(std::vector<std::uint64_t> head, PreciseReal tail) {
  if (head.empty()) throw InvalidArgument("empty quotient chain");
  for (std::size_t i = 1; i < head.size(); ++i)
    if (head[i] == 0) throw InvalidArgument("chain quotients after the first must be >= 1");
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Composed;
  e->head = std::move(head);
  e->tail = tail.expr_;
  return PreciseReal(std::move(e), tail.digits_);
}

PreciseReal PreciseReal::with_digits(int digits) const {
  return PreciseReal(expr_, digits);
}

bool PreciseReal::is_rational() const {
  return expr_->kind == Expr::Kind::Rational;
}

std::string PreciseReal::provenance() const {
  const Expr& e = *expr_;
  std::ostringstream os;
  switch (e.kind) {
    case Expr::Kind::Rational:
      os << e.num;
      if (e.den != 1) os << "/" << e.den;
      break;
    case Expr::Kind::Sqrt:
      os << "sqrt(" << e.sqrt_arg << ")";
      break;
    case Expr::Kind::Golden:
      os << "golden";
      break;
    case Expr::Kind::RootOfLog:
      os << "root(" << e.root << ",log(" << e.log_arg << "))";
      break;
    case Expr::Kind::Composed: {
      os << "chain(";
      for (std::size_t i = 0; i < e.head.size(); ++i) {
        if (i) os << ",";
        os << e.head[i];
      }
      os << "|" << PreciseReal(e.tail, digits_).provenance() << ")";
      break;
    }
  }
  return os.str();
}

std::string PreciseReal::decimal(int digits) const {
  Real v = eval(*expr_, digits_to_bits(std::max(digits, digits_)));
  char* s = nullptr;
  if (mpfr_asprintf(&s, "%.*Rg", digits, v.get()) < 0)
    throw Error("mpfr_asprintf failed");
  std::string out(s);
  mpfr_free_str(s);
  return out;
}

PreciseReal PreciseReal::parse_expression(const std::string& raw, int digits) {
  std::string s;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw InvalidArgument("empty expression");

  if (s == "golden") return golden(digits);

  if (s.starts_with("sqrt(") && s.ends_with(")")) {
    unsigned long d = std::stoul(s.substr(5, s.size() - 6));
    return sqrt_int(d, digits);
  }
  if (s.starts_with("root(") && s.ends_with("))")) {
    auto comma = s.find(',');
    if (comma == std::string::npos || s.compare(comma, 5, ",log(") != 0)
      throw InvalidArgument("bad root(...) expression: " + raw);
    unsigned r = static_cast<unsigned>(std::stoul(s.substr(5, comma - 5)));
    mpz_class n(s.substr(comma + 5, s.size() - comma - 7));
    return root_of_log(n, r, digits);
  }
  if (s.find_first_not_of("0123456789/") == std::string::npos) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return rational(mpz_class(s), 1, digits);
    return rational(mpz_class(s.substr(0, slash)), mpz_class(s.substr(slash + 1)),
                    digits);
  }
  throw InvalidArgument("unrecognized expression: " + raw);
}

// ---------------------------------------------------------------------------
// Expansion

struct ExpandAccess {
  static const Expr& expr(const PreciseReal& x) { return *x.expr_; }
};

namespace {

PartialQuotients expand_window_impl(const PreciseReal& x, std::size_t skip,
                                    std::size_t count) {
  if (count == 0) throw InvalidArgument("quotient count must be >= 1");
  const Expr& e = ExpandAccess::expr(x);
  const std::size_t total = skip + count;

  if (e.kind == Expr::Kind::Rational) {
    RawExpansion raw = expand_rational(e.num, e.den, total);
    return slice_window(raw, skip, count, x.working_digits());
  }

  int digits = std::max(x.working_digits(), kMinDigits);
  for (int attempt = 0; attempt < 4; ++attempt) {
    RawExpansion lo = expand_float(e, digits, total);
    RawExpansion hi = expand_float(e, digits * 2, total);
    if (lo.q == hi.q && lo.terminated == hi.terminated)
      return slice_window(lo, skip, count, digits);
    digits *= 2;
  }
  throw PrecisionError("expansion of " + x.provenance() +
                       " unstable after 3 precision doublings");
}

}  // namespace

PartialQuotients cf_expand(const PreciseReal& x, std::size_t count) {
  return expand_window_impl(x, 0, count);
}

PartialQuotients cf_window(const PreciseReal& x, std::size_t skip, std::size_t count) {
  return expand_window_impl(x, skip, count);
}

PreciseReal transcendental_from_nonce(const mpz_class& n, unsigned r, int digits) {
  return PreciseReal::root_of_log(n, r, std::max(digits, kDefaultDigits));
}

std::vector<PreciseReal> multi_continuation(const PartialQuotients& window,
                                            std::size_t k, RandomSource& rng) {
  if (k < 2) throw InvalidArgument("need at least two continuations");
  if (window.quotients.empty()) throw InvalidArgument("empty window");
  for (auto q : window.quotients)
    if (q == 0) throw InvalidArgument("window quotients must be >= 1");

  std::set<std::vector<std::uint64_t>> used;
  std::vector<PreciseReal> out;
  out.reserve(k);
  while (out.size() < k) {
    std::size_t m = 2 + rng.below(4);
    std::vector<std::uint64_t> prefix(m);
    for (auto& p : prefix) p = 1 + rng.below(9);
    if (!used.insert(prefix).second) continue;

    unsigned long c;
    do {
      c = static_cast<unsigned long>(2 + rng.below(47));
    } while (is_perfect_square(c));

    std::vector<std::uint64_t> head = prefix;
    head.insert(head.end(), window.quotients.begin(), window.quotients.end());
    out.push_back(PreciseReal::composed(std::move(head), PreciseReal::sqrt_int(c)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// FC challenge

std::array<std::uint8_t, 72> FcChallenge::encode() const {
  if (quotients.quotients.size() != 9)
    throw Error("FC challenge must hold exactly 9 quotients");
  std::array<std::uint8_t, 72> out{};
  for (std::size_t i = 0; i < 9; ++i) {
    std::uint64_t q = quotients.quotients[i];
    for (int b = 0; b < 8; ++b)
      out[i * 8 + b] = static_cast<std::uint8_t>(q >> (56 - 8 * b));
  }
  return out;
}

std::optional<FcChallenge> FcChallenge::decode(ByteView wire) {
  if (wire.size() != 72) return std::nullopt;
  FcChallenge fc;
  for (std::size_t i = 0; i < 9; ++i)
    fc.quotients.quotients.push_back(get_u64_be(wire.subspan(i * 8)));
  return fc;
}

FcChallenge derive_fc(const mpz_class& nonce, const crypto::GroupElement& key_a,
                      const crypto::GroupElement& key_b, int digits) {
  Bytes cat;
  const auto& a = key_a.bytes();
  const auto& b = key_b.bytes();
  cat.insert(cat.end(), a.begin(), a.end());
  cat.insert(cat.end(), b.begin(), b.end());

  FcChallenge fc;
  fc.binding = crypto::sha256(cat);
  std::size_t m = 2 + ((std::size_t{fc.binding[0]} << 8 | fc.binding[1]) % 64);
  PreciseReal x = transcendental_from_nonce(nonce, 3, digits);
  fc.quotients = cf_window(x, m, 9);
  return fc;
}

// ---------------------------------------------------------------------------
// Helpers

std::optional<std::size_t> detect_period(const std::vector<std::uint64_t>& q) {
  if (q.size() < 3) return std::nullopt;
  const std::size_t len = q.size() - 1;  // entries after the integer part
  for (std::size_t p = 1; 2 * p <= len; ++p) {
    bool ok = true;
    for (std::size_t i = 1; i + p < q.size(); ++i) {
      if (q[i] != q[i + p]) {
        ok = false;
        break;
      }
    }
    if (ok) return p;
  }
  return std::nullopt;
}

std::vector<CfFixture> parse_fixture_lines(const std::string& text) {
  std::vector<CfFixture> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto s1 = line.find(';');
    auto s2 = line.find(';', s1 + 1);
    if (s1 == std::string::npos || s2 == std::string::npos)
      throw InvalidArgument("bad fixture line: " + line);
    CfFixture f;
    f.expression = line.substr(0, s1);
    while (!f.expression.empty() && f.expression.back() == ' ')
      f.expression.pop_back();
    f.precision = std::stoi(line.substr(s1 + 1, s2 - s1 - 1));
    std::istringstream qs(line.substr(s2 + 1));
    std::string tok;
    while (std::getline(qs, tok, ','))
      f.quotients.push_back(std::stoull(tok));
    out.push_back(std::move(f));
  }
  return out;
}

std::string format_fixture(const CfFixture& f) {
  std::ostringstream os;
  os << f.expression << " ; " << f.precision << " ; ";
  for (std::size_t i = 0; i < f.quotients.size(); ++i) {
    if (i) os << ",";
    os << f.quotients[i];
  }
  return os.str();
}

}  // namespace ofsim::contfrac

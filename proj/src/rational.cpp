#include "bwcs/rational.hpp"

#include <cctype>

namespace bwcs {

Int round_nearest(const Int& n, const Int& d) {
  Int q, r;
  mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
  // r in [0, d); round up when 2r >= d.
  if (r * 2 >= d) q += 1;
  return q;
}

std::optional<Rat> parse_rational(const std::string& text) {
  if (text.empty()) return std::nullopt;
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    std::string num = text.substr(0, slash), den = text.substr(slash + 1);
    if (num.empty() || den.empty()) return std::nullopt;
    Int n, d;
    if (mpz_set_str(n.get_mpz_t(), num.c_str(), 10) != 0) return std::nullopt;
    if (mpz_set_str(d.get_mpz_t(), den.c_str(), 10) != 0) return std::nullopt;
    if (d == 0) return std::nullopt;
    Rat r(n, d);
    r.canonicalize();
    return r;
  }
  auto dot = text.find('.');
  if (dot != std::string::npos) {
    std::string ip = text.substr(0, dot), fp = text.substr(dot + 1);
    if (fp.empty()) return std::nullopt;
    for (char c : fp)
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    bool neg = !ip.empty() && ip[0] == '-';
    if (!ip.empty() && (ip[0] == '-' || ip[0] == '+')) ip = ip.substr(1);
    if (ip.empty()) ip = "0";
    Int whole, frac;
    if (mpz_set_str(whole.get_mpz_t(), ip.c_str(), 10) != 0) return std::nullopt;
    if (mpz_set_str(frac.get_mpz_t(), fp.c_str(), 10) != 0) return std::nullopt;
    Int scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, fp.size());
    Rat r(whole * scale + frac, scale);
    r.canonicalize();
    if (neg) r = -r;
    return r;
  }
  Int n;
  if (mpz_set_str(n.get_mpz_t(), text.c_str(), 10) != 0) return std::nullopt;
  return Rat(n);
}

std::string to_fraction_string(const Rat& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

std::string to_decimal_string(const Rat& r, int digits) {
  Int den = r.get_den();
  // Strip factors of 2 and 5; exact decimal iff nothing remains.
  Int rest = den;
  while (rest % 2 == 0) rest /= 2;
  while (rest % 5 == 0) rest /= 5;
  bool exact = (rest == 1);

  Int num = r.get_num();
  bool neg = num < 0;
  if (neg) num = -num;

  if (exact) {
    // Find k with den | 10^k, then print num*10^k/den with a point.
    int k = 0;
    Int pow = 1;
    while (pow % den != 0) {
      pow *= 10;
      ++k;
    }
    Int scaled = num * (pow / den);
    std::string s = scaled.get_str();
    std::string out;
    if (k == 0) {
      out = s;
    } else {
      while (static_cast<int>(s.size()) <= k) s.insert(s.begin(), '0');
      out = s.substr(0, s.size() - k) + "." + s.substr(s.size() - k);
      while (out.back() == '0') out.pop_back();
      if (out.back() == '.') out.pop_back();
    }
    return (neg ? "-" : "") + out;
  }

  Int pow;
  mpz_ui_pow_ui(pow.get_mpz_t(), 10, digits);
  Int scaled = round_nearest(num * pow, den);
  std::string s = scaled.get_str();
  while (static_cast<int>(s.size()) <= digits) s.insert(s.begin(), '0');
  std::string out = s.substr(0, s.size() - digits) + "." + s.substr(s.size() - digits);
  return std::string("~") + (neg ? "-" : "") + out;
}

}  // namespace bwcs

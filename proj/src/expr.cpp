#include "plm/expr.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <climits>
#include <cmath>
#include <optional>
#include <sstream>

#include "plm/numeric.hpp"

namespace plm {
namespace detail {

// ---------------------------------------------------------------------------
// polynomial helpers (all polys in one call share the same slot width)

static bool p_is_zero(const Poly& p) { return p.empty(); }

static Poly p_const(int width, const Rational& c) {
  Poly p;
  if (!rat_is_zero(c)) p.emplace(ExpVec(width, 0), c);
  return p;
}

static bool p_is_const(const Poly& p) {
  if (p.empty()) return true;
  if (p.size() > 1) return false;
  const auto& e = p.begin()->first;
  return std::all_of(e.begin(), e.end(), [](uint32_t x) { return x == 0; });
}

static void p_add_term(Poly& p, const ExpVec& e, const Rational& c) {
  auto it = p.find(e);
  if (it == p.end()) {
    if (!rat_is_zero(c)) p.emplace(e, c);
    return;
  }
  it->second += c;
  if (rat_is_zero(it->second)) p.erase(it);
}

static Poly p_add(const Poly& a, const Poly& b) {
  Poly r = a;
  for (const auto& [e, c] : b) p_add_term(r, e, c);
  return r;
}

static Poly p_neg(const Poly& a) {
  Poly r = a;
  for (auto& [e, c] : r) c = -c;
  return r;
}

static Poly p_sub(const Poly& a, const Poly& b) { return p_add(a, p_neg(b)); }

static Poly p_scale(const Poly& a, const Rational& s) {
  Poly r;
  if (rat_is_zero(s)) return r;
  for (const auto& [e, c] : a) r.emplace(e, c * s);
  return r;
}

static Poly p_mul(const Poly& a, const Poly& b) {
  Poly r;
  for (const auto& [ea, ca] : a)
    for (const auto& [eb, cb] : b) {
      ExpVec e(ea.size());
      for (size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      p_add_term(r, e, ca * cb);
    }
  return r;
}

static Poly p_pow(const Poly& a, int n, int width) {
  Poly r = p_const(width, rat(1));
  Poly base = a;
  while (n > 0) {
    if (n & 1) r = p_mul(r, base);
    base = p_mul(base, base);
    n >>= 1;
  }
  return r;
}

// exact multivariate division; returns false when not exact
static bool p_divexact(const Poly& n, const Poly& d, Poly& q) {
  q.clear();
  if (p_is_zero(d)) return false;
  Poly r = n;
  const auto& [de, dc] = *d.rbegin();
  while (!r.empty()) {
    const auto& [re, rc] = *r.rbegin();
    ExpVec qe(re.size());
    for (size_t i = 0; i < re.size(); ++i) {
      if (re[i] < de[i]) return false;
      qe[i] = re[i] - de[i];
    }
    Rational qc = rc / dc;
    p_add_term(q, qe, qc);
    // r -= qc * x^qe * d
    for (const auto& [e, c] : d) {
      ExpVec se(e.size());
      for (size_t i = 0; i < e.size(); ++i) se[i] = e[i] + qe[i];
      p_add_term(r, se, -(c * qc));
    }
  }
  return true;
}

static int p_top_slot(const Poly& a) {
  int top = -1;
  for (const auto& [e, c] : a)
    for (int i = static_cast<int>(e.size()) - 1; i > top; --i)
      if (e[i] > 0) {
        top = i;
        break;
      }
  return top;
}

static uint32_t p_deg_in(const Poly& a, int s) {
  uint32_t d = 0;
  for (const auto& [e, c] : a) d = std::max(d, e[s]);
  return d;
}

// view as univariate in slot s with Poly coefficients (slot s zeroed)
static std::map<uint32_t, Poly> p_view(const Poly& a, int s) {
  std::map<uint32_t, Poly> v;
  for (const auto& [e, c] : a) {
    ExpVec r = e;
    uint32_t d = r[s];
    r[s] = 0;
    v[d].emplace(std::move(r), c);
  }
  return v;
}

static Poly p_gcd(const Poly& a, const Poly& b, int width);

static Poly p_monic(const Poly& a) {
  if (a.empty()) return a;
  return p_scale(a, rat(1) / a.rbegin()->second);
}

static Poly p_content_wrt(const Poly& a, int s, int width) {
  Poly g;
  for (const auto& [d, coeff] : p_view(a, s)) g = p_gcd(g, coeff, width);
  return g;
}

// pseudo remainder of a by b in slot s
static Poly p_prem(Poly a, const Poly& b, int s) {
  uint32_t db = p_deg_in(b, s);
  auto bv = p_view(b, s);
  const Poly& lb = bv.rbegin()->second;
  while (!a.empty()) {
    uint32_t da = p_deg_in(a, s);
    if (da < db) break;
    auto av = p_view(a, s);
    const Poly la = av.rbegin()->second;
    // a = lb*a - la * x^(da-db) * b
    Poly shifted;
    for (const auto& [e, c] : b) {
      ExpVec r = e;
      r[s] += da - db;
      shifted.emplace(std::move(r), c);
    }
    a = p_sub(p_mul(lb, a), p_mul(la, shifted));
  }
  return a;
}

// per-slot minimum exponents over all terms (the monomial content)
static ExpVec p_minexps(const Poly& a) {
  ExpVec m = a.begin()->first;
  for (const auto& [e, c] : a)
    for (size_t i = 0; i < m.size(); ++i) m[i] = std::min(m[i], e[i]);
  return m;
}

static Poly p_shift_down(const Poly& a, const ExpVec& m) {
  Poly r;
  for (const auto& [e, c] : a) {
    ExpVec k(e.size());
    for (size_t i = 0; i < e.size(); ++i) k[i] = e[i] - m[i];
    r.emplace(std::move(k), c);
  }
  return r;
}

static Poly p_clear_den(const Poly& a) {
  mpz_class l = 1;
  for (const auto& [e, c] : a)
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den().get_mpz_t());
  return l == 1 ? a : p_scale(a, Rational(l));
}

static mpz_class p_maxnorm(const Poly& a) {
  mpz_class n = 0;
  for (const auto& [e, c] : a) {
    mpz_class v = abs(c.get_num());
    if (v > n) n = v;
  }
  return n;
}

static mpz_class p_int_content(const Poly& a) {
  mpz_class g = 0;
  for (const auto& [e, c] : a)
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_num().get_mpz_t());
  return g;
}

static Poly p_eval_slot_int(const Poly& a, int s, const mpz_class& xi) {
  Poly r;
  std::map<uint32_t, mpz_class> pw;
  for (const auto& [e, c] : a) {
    auto it = pw.find(e[s]);
    if (it == pw.end()) {
      mpz_class p;
      mpz_pow_ui(p.get_mpz_t(), xi.get_mpz_t(), e[s]);
      it = pw.emplace(e[s], std::move(p)).first;
    }
    ExpVec k = e;
    k[s] = 0;
    p_add_term(r, k, c * Rational(it->second));
  }
  return r;
}

// balanced remainder in (-xi/2, xi/2] applied to every coefficient
static Poly p_smod_int(const Poly& a, const mpz_class& xi) {
  Poly r;
  mpz_class half = xi / 2;
  for (const auto& [e, c] : a) {
    mpz_class m = c.get_num() % xi;
    if (m < 0) m += xi;
    if (m > half) m -= xi;
    if (m != 0) r.emplace(e, Rational(m));
  }
  return r;
}

static Poly p_intdiv_exact(const Poly& a, const mpz_class& xi) {
  Poly r;
  for (const auto& [e, c] : a) {
    mpz_class q;
    mpz_divexact(q.get_mpz_t(), c.get_num().get_mpz_t(), xi.get_mpz_t());
    r.emplace(e, Rational(q));
  }
  return r;
}

// gcd by evaluation at a large integer point: map out the top slot, take the
// gcd of the images, lift back through balanced base-xi digits, and accept
// only candidates that exactly divide both inputs.  Inputs must have integer
// coefficients.  Unlucky evaluation points are retried with a larger xi.
static std::optional<Poly> p_gcd_heu(const Poly& Ain, const Poly& Bin, int depth) {
  int width = static_cast<int>(Ain.begin()->first.size());
  // split off integer contents; the polynomial part of the gcd is primitive,
  // and at recursion depth the outer levels' gcd rides in the content
  mpz_class ca = p_int_content(Ain), cb = p_int_content(Bin);
  mpz_class g0;
  mpz_gcd(g0.get_mpz_t(), ca.get_mpz_t(), cb.get_mpz_t());
  Poly A = ca == 1 ? Ain : p_scale(Ain, Rational(1) / Rational(ca));
  Poly B = cb == 1 ? Bin : p_scale(Bin, Rational(1) / Rational(cb));
  int s = std::max(p_top_slot(A), p_top_slot(B));
  if (s < 0 || p_is_const(A) || p_is_const(B)) return p_const(width, Rational(g0));
  if (depth > 32) return std::nullopt;
  mpz_class xi = 2 * std::min(p_maxnorm(A), p_maxnorm(B)) + 2;
  const uint32_t degbound = std::min(p_deg_in(A, s), p_deg_in(B, s));
  for (int t = 0; t < 6; ++t, xi = xi * 73794 / 27011) {
    Poly a0 = p_eval_slot_int(A, s, xi);
    Poly b0 = p_eval_slot_int(B, s, xi);
    if (p_is_zero(a0) || p_is_zero(b0)) continue;
    auto gam = p_gcd_heu(a0, b0, depth + 1);
    if (!gam) continue;
    Poly G;
    Poly x = std::move(*gam);
    bool bad = false;
    for (uint32_t i = 0; !p_is_zero(x); ++i) {
      if (i > degbound) {
        bad = true;
        break;
      }
      Poly digit = p_smod_int(x, xi);
      for (const auto& [e, c] : digit) {
        ExpVec k = e;
        k[s] = i;
        p_add_term(G, k, c);
      }
      x = p_intdiv_exact(p_sub(x, digit), xi);
    }
    if (bad || p_is_zero(G)) continue;
    mpz_class ct = p_int_content(G);
    if (ct > 1) G = p_scale(G, Rational(1) / Rational(ct));
    Poly q;
    if (p_divexact(A, G, q) && p_divexact(B, G, q))
      return g0 == 1 ? G : p_scale(G, Rational(g0));
  }
  return std::nullopt;
}

// primitive pseudo-remainder sequence; fallback when the heuristic gives up
static Poly p_gcd_prs(const Poly& a, const Poly& b, int width) {
  int s = std::max(p_top_slot(a), p_top_slot(b));
  if (s < 0) return p_const(width, rat(1));
  Poly ca = p_content_wrt(a, s, width);
  Poly cb = p_content_wrt(b, s, width);
  Poly ppa, ppb;
  bool ok = p_divexact(a, ca, ppa) && p_divexact(b, cb, ppb);
  assert(ok);
  (void)ok;
  Poly cg = p_gcd(ca, cb, width);
  if (p_deg_in(ppa, s) < p_deg_in(ppb, s)) std::swap(ppa, ppb);
  while (!p_is_zero(ppb) && p_deg_in(ppb, s) > 0) {
    Poly r = p_prem(ppa, ppb, s);
    ppa = std::move(ppb);
    if (p_is_zero(r)) {
      ppb = Poly{};
      break;
    }
    Poly cr = p_content_wrt(r, s, width);
    Poly tmp;
    ok = p_divexact(r, cr, tmp);
    assert(ok);
    ppb = std::move(tmp);
  }
  Poly g;
  if (p_is_zero(ppb)) {
    Poly cpa = p_content_wrt(ppa, s, width);
    bool ok2 = p_divexact(ppa, cpa, g);
    assert(ok2);
    (void)ok2;
  } else {
    g = p_const(width, rat(1));  // coprime primitive parts
  }
  return p_monic(p_mul(cg, g));
}

static Poly p_gcd(const Poly& a, const Poly& b, int width) {
  if (p_is_zero(a)) return p_monic(b);
  if (p_is_zero(b)) return p_monic(a);
  if (p_is_const(a) || p_is_const(b)) return p_const(width, rat(1));
  ExpVec ma = p_minexps(a), mb = p_minexps(b);
  ExpVec mg(ma.size());
  bool shifted = false;
  for (size_t i = 0; i < ma.size(); ++i) {
    mg[i] = std::min(ma[i], mb[i]);
    if (ma[i] || mb[i]) shifted = true;
  }
  const Poly sa = shifted ? p_shift_down(a, ma) : a;
  const Poly sb = shifted ? p_shift_down(b, mb) : b;
  Poly core;
  if (p_is_const(sa) || p_is_const(sb)) {
    core = p_const(width, rat(1));
  } else {
    auto h = p_gcd_heu(p_clear_den(sa), p_clear_den(sb), 0);
    core = h ? std::move(*h) : p_gcd_prs(sa, sb, width);
  }
  if (!shifted) return p_monic(core);
  Poly mono;
  mono.emplace(mg, rat(1));
  return p_monic(p_mul(core, mono));
}

// ---------------------------------------------------------------------------
// atom / impl comparison

static int vec_cmp_graded(const ExpVec& a, const ExpVec& b) {
  GradedLexLess less;
  if (less(a, b)) return -1;
  if (less(b, a)) return 1;
  return 0;
}

static int poly_cmp(const Poly& a, const Poly& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end() && ib != b.end(); ++ia, ++ib) {
    int c = vec_cmp_graded(ia->first, ib->first);
    if (c != 0) return c;
    c = rat_cmp(ia->second, ib->second);
    if (c != 0) return c;
  }
  if (ia != a.end()) return 1;
  if (ib != b.end()) return -1;
  return 0;
}

static int atom_cmp(const Atom& a, const Atom& b) {
  if (a.kind != b.kind)
    return static_cast<int>(a.kind) < static_cast<int>(b.kind) ? -1 : 1;
  return impl_cmp(*a.arg, *b.arg);
}

int impl_cmp(const ExprImpl& a, const ExprImpl& b) {
  if (a.atoms.size() != b.atoms.size())
    return a.atoms.size() < b.atoms.size() ? -1 : 1;
  for (size_t i = 0; i < a.atoms.size(); ++i) {
    int c = atom_cmp(*a.atoms[i], *b.atoms[i]);
    if (c != 0) return c;
  }
  int c = poly_cmp(a.num, b.num);
  if (c != 0) return c;
  return poly_cmp(a.den, b.den);
}

}  // namespace detail

using detail::Atom;
using detail::ExprImpl;
using detail::ExpVec;
using detail::Poly;

// ---------------------------------------------------------------------------
// canonical construction

struct ExprOps {
  using ImplPtr = std::shared_ptr<const ExprImpl>;
  using AtomPtr = std::shared_ptr<const Atom>;

  static ScalarExpr wrap(ImplPtr p) { return ScalarExpr(std::move(p)); }

  static int width(const ExprImpl& i) {
    return i.chart->dim() + static_cast<int>(i.atoms.size());
  }

  // Remove atom slots unused by both polynomials, keep atoms sorted.
  // Then reduce the fraction, make the denominator monic, detect the
  // removable-singularity guard.
  static ScalarExpr make(ChartPtr chart, std::vector<AtomPtr> atoms, Poly num,
                         Poly den, bool detect_guard = true) {
    const int nv = chart->dim();
    int w = nv + static_cast<int>(atoms.size());
    if (detail::p_is_zero(den)) throw DomainError("division by zero expression");

    // prune unused atom slots
    std::vector<bool> used(atoms.size(), false);
    for (const Poly* p : {&num, &den})
      for (const auto& [e, c] : *p)
        for (size_t s = 0; s < atoms.size(); ++s)
          if (e[nv + s] > 0) used[s] = true;
    if (std::find(used.begin(), used.end(), false) != used.end()) {
      std::vector<AtomPtr> kept;
      std::vector<int> remap(atoms.size(), -1);
      for (size_t s = 0; s < atoms.size(); ++s)
        if (used[s]) {
          remap[s] = static_cast<int>(kept.size());
          kept.push_back(atoms[s]);
        }
      auto shrink = [&](const Poly& p) {
        Poly r;
        for (const auto& [e, c] : p) {
          ExpVec ne(nv + kept.size(), 0);
          for (int i = 0; i < nv; ++i) ne[i] = e[i];
          for (size_t s = 0; s < atoms.size(); ++s)
            if (e[nv + s] > 0) ne[nv + remap[s]] = e[nv + s];
          r.emplace(std::move(ne), c);
        }
        return r;
      };
      num = shrink(num);
      den = shrink(den);
      atoms = std::move(kept);
      w = nv + static_cast<int>(atoms.size());
    }

    if (detail::p_is_zero(num)) {
      auto impl = std::make_shared<ExprImpl>();
      impl->chart = std::move(chart);
      impl->den = detail::p_const(nv, rat(1));
      return wrap(impl);
    }

    // reduce
    Poly g = detail::p_gcd(num, den, w);
    if (!detail::p_is_const(g) || (!g.empty() && g.rbegin()->second != rat(1))) {
      Poly n2, d2;
      bool ok = detail::p_divexact(num, g, n2) && detail::p_divexact(den, g, d2);
      assert(ok);
      (void)ok;
      num = std::move(n2);
      den = std::move(d2);
    }
    // monic denominator
    Rational lc = den.rbegin()->second;
    if (lc != rat(1)) {
      den = detail::p_scale(den, rat(1) / lc);
      num = detail::p_scale(num, rat(1) / lc);
    }

    auto impl = std::make_shared<ExprImpl>();
    impl->chart = std::move(chart);
    impl->atoms = std::move(atoms);
    impl->num = std::move(num);
    impl->den = std::move(den);

    if (detect_guard) attach_guard(*impl);
    return wrap(std::move(impl));
  }

  // Guard: denominator is exactly one variable (exponent 1) and the numerator
  // vanishes identically at that variable's zero. Precompute the first six
  // Taylor coefficients of the numerator in that variable, divided through for
  // direct evaluation of num/den on the |v| < 1e-6 branch.
  static void attach_guard(ExprImpl& impl) {
    if (impl.den.size() != 1) return;
    const auto& [e, c] = *impl.den.begin();
    const int nv = impl.chart->dim();
    int var = -1;
    for (size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0) continue;
      if (e[i] != 1 || static_cast<int>(i) >= nv || var >= 0) return;
      var = static_cast<int>(i);
    }
    if (var < 0) return;  // constant denominator
    ScalarExpr numer = wrap(std::make_shared<ExprImpl>(ExprImpl{
        impl.chart, impl.atoms, impl.num, detail::p_const(nv + impl.atoms.size(), rat(1)),
        std::nullopt}));
    ScalarExpr zero = ScalarExpr::constant(impl.chart, 0);
    if (!numer.substitute_var(var, zero).is_zero()) return;
    detail::Guard g;
    g.var = var;
    ScalarExpr deriv = numer;
    Rational fact(1);
    for (int k = 1; k <= 6; ++k) {
      deriv = deriv.differentiate(var);
      fact *= k;
      ScalarExpr tk = deriv.substitute_var(var, zero) *
                      ScalarExpr::constant(impl.chart, rat(1) / (fact * c));
      g.taylor.push_back(tk);
    }
    impl.guard = std::move(g);
  }

  // merge atom tables of two impls over the same chart; returns merged atoms
  // and polys of both sides re-indexed into the merged width
  struct Merged {
    std::vector<AtomPtr> atoms;
    Poly na, da, nb, db;
  };

  static Poly remap(const Poly& p, int nv, const std::vector<int>& slot_map,
                    int new_natoms) {
    Poly r;
    for (const auto& [e, c] : p) {
      ExpVec ne(nv + new_natoms, 0);
      for (int i = 0; i < nv; ++i) ne[i] = e[i];
      for (size_t s = nv; s < e.size(); ++s)
        if (e[s] > 0) ne[nv + slot_map[s - nv]] = e[s];
      r.emplace(std::move(ne), c);
    }
    return r;
  }

  static Merged merge(const ExprImpl& a, const ExprImpl& b) {
    const int nv = a.chart->dim();
    std::vector<AtomPtr> atoms;
    std::vector<int> ma(a.atoms.size()), mb(b.atoms.size());
    size_t i = 0, j = 0;
    while (i < a.atoms.size() || j < b.atoms.size()) {
      int c;
      if (i == a.atoms.size())
        c = 1;
      else if (j == b.atoms.size())
        c = -1;
      else
        c = detail::atom_cmp(*a.atoms[i], *b.atoms[j]);
      if (c < 0) {
        ma[i++] = static_cast<int>(atoms.size());
        atoms.push_back(a.atoms[i - 1]);
      } else if (c > 0) {
        mb[j++] = static_cast<int>(atoms.size());
        atoms.push_back(b.atoms[j - 1]);
      } else {
        ma[i++] = mb[j++] = static_cast<int>(atoms.size());
        atoms.push_back(a.atoms[i - 1]);
      }
    }
    Merged m;
    int na = static_cast<int>(atoms.size());
    m.na = remap(a.num, nv, ma, na);
    m.da = remap(a.den, nv, ma, na);
    m.nb = remap(b.num, nv, mb, na);
    m.db = remap(b.den, nv, mb, na);
    m.atoms = std::move(atoms);
    return m;
  }

  static void check_charts(const ScalarExpr& a, const ScalarExpr& b) {
    if (!a.valid() || !b.valid()) throw DomainError("empty expression handle");
    if (!same_chart(a.chart(), b.chart()))
      throw DomainError("expressions over different charts");
  }
};

// ---------------------------------------------------------------------------
// public constructors and arithmetic

ScalarExpr ScalarExpr::constant(ChartPtr chart, Rational c) {
  const int nv = chart->dim();
  Poly num = detail::p_const(nv, c);
  Poly den = detail::p_const(nv, rat(1));
  return ExprOps::make(std::move(chart), {}, std::move(num), std::move(den), false);
}

ScalarExpr ScalarExpr::variable(ChartPtr chart, int index) {
  const int nv = chart->dim();
  if (index < 0 || index >= nv) throw DomainError("variable index out of range");
  ExpVec e(nv, 0);
  e[index] = 1;
  Poly num;
  num.emplace(std::move(e), rat(1));
  Poly den = detail::p_const(nv, rat(1));
  return ExprOps::make(std::move(chart), {}, std::move(num), std::move(den), false);
}

ScalarExpr ScalarExpr::apply(FuncKind kind, const ScalarExpr& arg) {
  if (!arg.valid()) throw DomainError("empty expression handle");
  if (arg.is_zero()) {
    switch (kind) {
      case FuncKind::Exp: return constant(arg.chart(), 1);
      case FuncKind::Sin: return constant(arg.chart(), 0);
      case FuncKind::Cos: return constant(arg.chart(), 1);
    }
  }
  auto atom = std::make_shared<Atom>(Atom{kind, arg.p_});
  const int nv = arg.chart()->dim();
  ExpVec e(nv + 1, 0);
  e[nv] = 1;
  Poly num;
  num.emplace(std::move(e), rat(1));
  Poly den;
  den.emplace(ExpVec(nv + 1, 0), rat(1));
  return ExprOps::make(arg.chart(), {std::move(atom)}, std::move(num), std::move(den),
                       false);
}

ScalarExpr ScalarExpr::operator-() const {
  if (!valid()) throw DomainError("empty expression handle");
  return ExprOps::make(p_->chart, p_->atoms, detail::p_neg(p_->num), p_->den);
}

ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b) {
  ExprOps::check_charts(a, b);
  auto m = ExprOps::merge(*a.p_, *b.p_);
  Poly num = detail::p_add(detail::p_mul(m.na, m.db), detail::p_mul(m.nb, m.da));
  Poly den = detail::p_mul(m.da, m.db);
  return ExprOps::make(a.chart(), std::move(m.atoms), std::move(num), std::move(den));
}

ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b) {
  ExprOps::check_charts(a, b);
  auto m = ExprOps::merge(*a.p_, *b.p_);
  Poly num = detail::p_sub(detail::p_mul(m.na, m.db), detail::p_mul(m.nb, m.da));
  Poly den = detail::p_mul(m.da, m.db);
  return ExprOps::make(a.chart(), std::move(m.atoms), std::move(num), std::move(den));
}

ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b) {
  ExprOps::check_charts(a, b);
  auto m = ExprOps::merge(*a.p_, *b.p_);
  Poly num = detail::p_mul(m.na, m.nb);
  Poly den = detail::p_mul(m.da, m.db);
  return ExprOps::make(a.chart(), std::move(m.atoms), std::move(num), std::move(den));
}

ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b) {
  ExprOps::check_charts(a, b);
  auto m = ExprOps::merge(*a.p_, *b.p_);
  if (detail::p_is_zero(m.nb)) throw DomainError("division by zero expression");
  Poly num = detail::p_mul(m.na, m.db);
  Poly den = detail::p_mul(m.da, m.nb);
  return ExprOps::make(a.chart(), std::move(m.atoms), std::move(num), std::move(den));
}

ScalarExpr ScalarExpr::pow(int e) const {
  if (!valid()) throw DomainError("empty expression handle");
  if (e == 0) return constant(chart(), 1);
  bool inv = e < 0;
  int n = inv ? -e : e;
  const int w = ExprOps::width(*p_);
  Poly num = detail::p_pow(p_->num, n, w);
  Poly den = detail::p_pow(p_->den, n, w);
  if (inv) {
    if (detail::p_is_zero(num)) throw DomainError("division by zero expression");
    std::swap(num, den);
  }
  return ExprOps::make(p_->chart, p_->atoms, std::move(num), std::move(den));
}

// ---------------------------------------------------------------------------
// predicates

bool ScalarExpr::is_zero() const { return detail::p_is_zero(p_->num); }

bool ScalarExpr::is_constant() const {
  return detail::p_is_const(p_->num) && detail::p_is_const(p_->den);
}

Rational ScalarExpr::constant_value() const {
  if (!is_constant()) throw DomainError("not a constant expression");
  if (is_zero()) return rat(0);
  return p_->num.begin()->second / p_->den.begin()->second;
}

bool ScalarExpr::has_function_atoms() const { return !p_->atoms.empty(); }

bool ScalarExpr::is_polynomial() const {
  return p_->atoms.empty() && detail::p_is_const(p_->den);
}

bool ScalarExpr::equals(const ScalarExpr& o) const {
  ExprOps::check_charts(*this, o);
  if (p_ == o.p_) return true;
  return detail::impl_cmp(*p_, *o.p_) == 0;
}

int ScalarExpr::cmp(const ScalarExpr& o) const {
  ExprOps::check_charts(*this, o);
  if (p_ == o.p_) return 0;
  return detail::impl_cmp(*p_, *o.p_);
}

ScalarExpr ScalarExpr::numerator_expr() const {
  return ExprOps::make(p_->chart, p_->atoms, p_->num,
                       detail::p_const(ExprOps::width(*p_), rat(1)), false);
}

ScalarExpr ScalarExpr::denominator_expr() const {
  return ExprOps::make(p_->chart, p_->atoms, p_->den,
                       detail::p_const(ExprOps::width(*p_), rat(1)), false);
}

// ---------------------------------------------------------------------------
// calculus

ScalarExpr ScalarExpr::differentiate(int var) const {
  if (!valid()) throw DomainError("empty expression handle");
  const ChartPtr& ch = p_->chart;
  if (var < 0 || var >= ch->dim()) throw DomainError("variable index out of range");
  const int nv = ch->dim();
  const int w = ExprOps::width(*p_);

  auto poly_derivative = [&](const Poly& p) -> ScalarExpr {
    // direct part: derivative through the variable slots
    Poly direct;
    for (const auto& [e, c] : p) {
      if (e[var] == 0) continue;
      ExpVec ne = e;
      ne[var] -= 1;
      detail::p_add_term(direct, ne, c * rat(e[var]));
    }
    ScalarExpr res = ExprOps::make(ch, p_->atoms, std::move(direct),
                                   detail::p_const(w, rat(1)), false);
    // chain rule through each function atom
    for (size_t s = 0; s < p_->atoms.size(); ++s) {
      Poly partial;
      for (const auto& [e, c] : p) {
        if (e[nv + s] == 0) continue;
        ExpVec ne = e;
        ne[nv + s] -= 1;
        detail::p_add_term(partial, ne, c * rat(e[nv + s]));
      }
      if (detail::p_is_zero(partial)) continue;
      const Atom& atom = *p_->atoms[s];
      ScalarExpr arg = ExprOps::wrap(atom.arg);
      ScalarExpr darg = arg.differentiate(var);
      if (darg.is_zero()) continue;
      ScalarExpr datom;
      switch (atom.kind) {
        case FuncKind::Exp:
          datom = apply(FuncKind::Exp, arg) * darg;
          break;
        case FuncKind::Sin:
          datom = apply(FuncKind::Cos, arg) * darg;
          break;
        case FuncKind::Cos:
          datom = -(apply(FuncKind::Sin, arg) * darg);
          break;
      }
      ScalarExpr pexpr = ExprOps::make(ch, p_->atoms, std::move(partial),
                                       detail::p_const(w, rat(1)), false);
      res += pexpr * datom;
    }
    return res;
  };

  ScalarExpr n = numerator_expr();
  ScalarExpr dn = poly_derivative(p_->num);
  if (detail::p_is_const(p_->den)) return dn;
  ScalarExpr d = denominator_expr();
  ScalarExpr dd = poly_derivative(p_->den);
  return (dn * d - n * dd) / (d * d);
}

ScalarExpr ScalarExpr::substitute(const std::vector<ScalarExpr>& vals,
                                  ChartPtr target) const {
  if (!valid()) throw DomainError("empty expression handle");
  const int nv = p_->chart->dim();
  if (static_cast<int>(vals.size()) != nv)
    throw DomainError("substitution arity mismatch");
  for (const auto& v : vals)
    if (!v.valid() || !same_chart(v.chart(), target))
      throw DomainError("substitution value over wrong chart");

  std::vector<ScalarExpr> slot(nv + p_->atoms.size());
  for (int i = 0; i < nv; ++i) slot[i] = vals[i];
  for (size_t s = 0; s < p_->atoms.size(); ++s) {
    const Atom& atom = *p_->atoms[s];
    ScalarExpr arg = ExprOps::wrap(atom.arg).substitute(vals, target);
    slot[nv + s] = apply(atom.kind, arg);
  }

  auto eval_poly = [&](const Poly& p) {
    ScalarExpr acc = ScalarExpr::constant(target, 0);
    for (const auto& [e, c] : p) {
      ScalarExpr term = ScalarExpr::constant(target, c);
      for (size_t i = 0; i < e.size(); ++i)
        if (e[i] > 0) term *= slot[i].pow(static_cast<int>(e[i]));
      acc += term;
    }
    return acc;
  };

  ScalarExpr n = eval_poly(p_->num);
  if (detail::p_is_const(p_->den)) {
    Rational dc = p_->den.begin()->second;
    return n * ScalarExpr::constant(target, rat(1) / dc);
  }
  return n / eval_poly(p_->den);
}

ScalarExpr ScalarExpr::substitute_var(int var, const ScalarExpr& value) const {
  const int nv = p_->chart->dim();
  std::vector<ScalarExpr> vals(nv);
  for (int i = 0; i < nv; ++i)
    vals[i] = (i == var) ? value : ScalarExpr::variable(p_->chart, i);
  return substitute(vals, p_->chart);
}

// ---------------------------------------------------------------------------
// degree utilities (numerator monomials, variable slots only)

namespace {

bool poly_uses_vars(const detail::Poly& p, const std::vector<int>& vars) {
  for (const auto& [e, c] : p)
    for (int v : vars)
      if (e[v] > 0) return true;
  return false;
}

bool impl_uses_vars(const detail::ExprImpl* im, const std::vector<int>& vars) {
  if (poly_uses_vars(im->num, vars) || poly_uses_vars(im->den, vars))
    return true;
  for (const auto& a : im->atoms)
    if (impl_uses_vars(a->arg.get(), vars)) return true;
  return false;
}

}  // namespace

bool ScalarExpr::vars_in_atoms(const std::vector<int>& vars) const {
  for (const auto& a : p_->atoms)
    if (impl_uses_vars(a->arg.get(), vars)) return true;
  return false;
}

int ScalarExpr::min_degree_in(const std::vector<int>& vars) const {
  if (is_zero()) return INT_MAX;
  int best = INT_MAX;
  for (const auto& [e, c] : p_->num) {
    int d = 0;
    for (int v : vars) d += static_cast<int>(e[v]);
    best = std::min(best, d);
  }
  return best;
}

int ScalarExpr::max_degree_in(const std::vector<int>& vars) const {
  int best = 0;
  for (const auto& [e, c] : p_->num) {
    int d = 0;
    for (int v : vars) d += static_cast<int>(e[v]);
    best = std::max(best, d);
  }
  return best;
}

ScalarExpr ScalarExpr::truncate_degree(const std::vector<int>& vars, int cutoff) const {
  Poly kept;
  for (const auto& [e, c] : p_->num) {
    int d = 0;
    for (int v : vars) d += static_cast<int>(e[v]);
    if (d < cutoff) kept.emplace(e, c);
  }
  return ExprOps::make(p_->chart, p_->atoms, std::move(kept), p_->den);
}

// ---------------------------------------------------------------------------
// numeric evaluation

namespace {

Dual dual_div(Dual n, Dual d) {
  if (std::abs(d.v) < 1e-12) throw PoleError("quotient pole at sample point");
  double v = n.v / d.v;
  return {v, (n.d - v * d.d) / d.v};
}

Dual dual_func(FuncKind k, Dual a) {
  switch (k) {
    case FuncKind::Exp: {
      double e = std::exp(a.v);
      return {e, e * a.d};
    }
    case FuncKind::Sin:
      return {std::sin(a.v), std::cos(a.v) * a.d};
    case FuncKind::Cos:
      return {std::cos(a.v), -std::sin(a.v) * a.d};
  }
  return {};
}

Dual dual_pow(Dual a, uint32_t n) {
  Dual r{1.0, 0.0};
  while (n) {
    if (n & 1) r = r * a;
    a = a * a;
    n >>= 1;
  }
  return r;
}

}  // namespace

Dual ScalarExpr::eval_dual(std::span<const Dual> point) const {
  if (!valid()) throw DomainError("empty expression handle");
  const ExprImpl& im = *p_;
  const int nv = im.chart->dim();
  if (static_cast<int>(point.size()) != nv)
    throw DomainError("evaluation point arity mismatch");

  if (im.guard && std::abs(point[im.guard->var].v) < 1e-6) {
    Dual t = point[im.guard->var];
    Dual acc{0.0, 0.0};
    Dual tp{1.0, 0.0};
    for (const auto& tk : im.guard->taylor) {
      acc = acc + tk.eval_dual(point) * tp;
      tp = tp * t;
    }
    return acc;
  }

  std::vector<Dual> slot(nv + im.atoms.size());
  for (int i = 0; i < nv; ++i) slot[i] = point[i];
  for (size_t s = 0; s < im.atoms.size(); ++s)
    slot[nv + s] = dual_func(im.atoms[s]->kind,
                             ExprOps::wrap(im.atoms[s]->arg).eval_dual(point));

  auto eval_poly = [&](const Poly& p) {
    Dual acc{0.0, 0.0};
    for (const auto& [e, c] : p) {
      Dual term{c.get_d(), 0.0};
      for (size_t i = 0; i < e.size(); ++i)
        if (e[i] > 0) term = term * dual_pow(slot[i], e[i]);
      acc = acc + term;
    }
    return acc;
  };

  Dual n = eval_poly(im.num);
  if (detail::p_is_const(im.den)) {
    double dc = im.den.begin()->second.get_d();
    return {n.v / dc, n.d / dc};
  }
  return dual_div(n, eval_poly(im.den));
}

double ScalarExpr::eval(std::span<const double> point) const {
  std::vector<Dual> dp(point.size());
  for (size_t i = 0; i < point.size(); ++i) dp[i] = {point[i], 0.0};
  return eval_dual(dp).v;
}

// ---------------------------------------------------------------------------
// parsing

namespace {

struct Lexer {
  const std::string& s;
  size_t pos = 0;

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  char peek() {
    skip();
    return pos < s.size() ? s[pos] : '\0';
  }
  char get() {
    skip();
    return pos < s.size() ? s[pos++] : '\0';
  }
  bool eat(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }
  std::string ident() {
    skip();
    size_t start = pos;
    while (pos < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
      ++pos;
    return s.substr(start, pos - start);
  }
  std::string digits() {
    skip();
    size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    return s.substr(start, pos - start);
  }
};

struct Parser {
  Lexer lex;
  ChartPtr chart;

  ScalarExpr expr() {
    ScalarExpr r = term();
    for (;;) {
      char c = lex.peek();
      if (c == '+') {
        lex.get();
        r += term();
      } else if (c == '-') {
        lex.get();
        r -= term();
      } else {
        return r;
      }
    }
  }

  ScalarExpr term() {
    ScalarExpr r = unary();
    for (;;) {
      char c = lex.peek();
      if (c == '*') {
        lex.get();
        r *= unary();
      } else if (c == '/') {
        lex.get();
        r = r / unary();
      } else {
        return r;
      }
    }
  }

  ScalarExpr unary() {
    if (lex.eat('-')) return -unary();
    return power();
  }

  ScalarExpr power() {
    ScalarExpr base = primary();
    if (lex.eat('^')) {
      bool neg = lex.eat('-');
      std::string d = lex.digits();
      if (d.empty()) throw ParseError("expected integer exponent after '^'");
      long e = std::stol(d);
      return base.pow(static_cast<int>(neg ? -e : e));
    }
    return base;
  }

  ScalarExpr primary() {
    char c = lex.peek();
    if (c == '(') {
      lex.get();
      ScalarExpr r = expr();
      if (!lex.eat(')')) throw ParseError("expected ')'");
      return r;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string d = lex.digits();
      return ScalarExpr::constant(chart, Rational(d));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string id = lex.ident();
      if (id == "exp" || id == "sin" || id == "cos") {
        if (!lex.eat('(')) throw ParseError("expected '(' after " + id);
        ScalarExpr a = expr();
        if (!lex.eat(')')) throw ParseError("expected ')'");
        FuncKind k = id == "exp"   ? FuncKind::Exp
                     : id == "sin" ? FuncKind::Sin
                                   : FuncKind::Cos;
        return ScalarExpr::apply(k, a);
      }
      int idx = chart->index(id);
      if (idx < 0) throw ParseError("unknown identifier: " + id);
      return ScalarExpr::variable(chart, idx);
    }
    throw ParseError(std::string("unexpected character: '") + c + "'");
  }
};

}  // namespace

ScalarExpr ScalarExpr::parse(ChartPtr chart, const std::string& src) {
  Parser p{Lexer{src}, chart};
  ScalarExpr r = p.expr();
  if (p.lex.peek() != '\0') throw ParseError("trailing input in expression");
  return r;
}

// ---------------------------------------------------------------------------
// rendering (canonical, parseable)

namespace {

std::string poly_str(const ExprImpl& im, const Poly& p) {
  if (p.empty()) return "0";
  const int nv = im.chart->dim();
  std::ostringstream out;
  bool first = true;
  // graded-lex descending: leading monomial first
  for (auto it = p.rbegin(); it != p.rend(); ++it) {
    const auto& [e, c] = *it;
    Rational mag = abs(c);
    if (first) {
      if (sgn(c) < 0) out << "-";
      first = false;
    } else {
      out << (sgn(c) < 0 ? " - " : " + ");
    }
    std::vector<std::string> factors;
    for (size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0) continue;
      std::string f;
      if (static_cast<int>(i) < nv) {
        f = im.chart->name(static_cast<int>(i));
      } else {
        const Atom& a = *im.atoms[i - nv];
        const char* fn = a.kind == FuncKind::Exp   ? "exp"
                         : a.kind == FuncKind::Sin ? "sin"
                                                   : "cos";
        ExprImpl tmp = *a.arg;
        std::string argstr =
            detail::p_is_const(tmp.den) && tmp.den.begin()->second == rat(1)
                ? poly_str(tmp, tmp.num)
                : "(" + poly_str(tmp, tmp.num) + ")/(" + poly_str(tmp, tmp.den) + ")";
        f = std::string(fn) + "(" + argstr + ")";
      }
      if (e[i] > 1) f += "^" + std::to_string(e[i]);
      factors.push_back(std::move(f));
    }
    bool unit = (mag == rat(1));
    if (factors.empty()) {
      out << rat_str(mag);
    } else {
      if (!unit) out << rat_str(mag) << "*";
      for (size_t k = 0; k < factors.size(); ++k) {
        if (k) out << "*";
        out << factors[k];
      }
    }
  }
  return out.str();
}

}  // namespace

std::string ScalarExpr::str() const {
  if (!valid()) return "<empty>";
  const ExprImpl& im = *p_;
  if (detail::p_is_const(im.den)) {
    // canonical form guarantees a monic constant denominator equals 1
    return poly_str(im, im.num);
  }
  return "(" + poly_str(im, im.num) + ")/(" + poly_str(im, im.den) + ")";
}

// ---------------------------------------------------------------------------
// zero decision

ZeroVerdict zero_verdict(const ScalarExpr& e, uint64_t seed, int points, double tol) {
  ZeroVerdict v;
  if (e.is_zero()) {
    v.zero = true;
    v.exact = true;
    return v;
  }
  if (!e.has_function_atoms()) {
    // reduced fraction of genuine polynomials: nonzero numerator decides
    v.zero = false;
    v.exact = true;
    return v;
  }
  Rng rng = Rng::stream(seed, 0x5eed);
  const int dim = e.chart()->dim();
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    for (int attempt = 0;; ++attempt) {
      std::vector<double> pt(dim);
      for (auto& x : pt) x = rng.uniform(-2.0, 2.0);
      try {
        worst = std::max(worst, std::abs(e.eval(pt)));
        break;
      } catch (const PoleError&) {
        if (attempt >= 10) break;
      }
    }
  }
  v.zero = worst <= tol;
  v.exact = false;
  v.witness = worst;
  return v;
}

}  // namespace plm

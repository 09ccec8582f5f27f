#include "plm/localmodel.hpp"

#include <string>
#include <utility>
#include <vector>

#include "plm/algebroid.hpp"

namespace plm {

namespace {

using Row = std::vector<ScalarExpr>;
using Mat = std::vector<Row>;

void require(bool ok, const std::string& msg) {
  if (!ok) throw DomainError(msg);
}

void finish(CheckRecord& rec, const std::vector<std::string>& bad,
            const std::string& ok) {
  rec.pass = bad.empty();
  if (rec.pass) {
    rec.details = ok;
    return;
  }
  std::string all;
  for (size_t i = 0; i < bad.size(); ++i) {
    if (i) all += "; ";
    all += bad[i];
  }
  rec.details = all;
}

// Zero decisions for one record: structural for atom-free residuals, seeded
// sampling otherwise.  Tracks whether every decision so far was structural.
struct ZeroGate {
  uint64_t seed;
  double tol;
  bool exact = true;

  bool scalar_zero(const ScalarExpr& e) {
    ZeroVerdict v = zero_verdict(e, seed, 32, tol);
    if (!v.exact) exact = false;
    return v.zero;
  }
};

std::string tuple_names(const ChartPtr& chart, const std::vector<int>& idx) {
  std::string s = "(";
  for (size_t k = 0; k < idx.size(); ++k) {
    if (k) s += ", ";
    s += chart->name(idx[k]);
  }
  return s + ")";
}

std::string set_names(const ChartPtr& chart, const std::vector<int>& idx) {
  std::string s = "{";
  for (size_t k = 0; k < idx.size(); ++k) {
    if (k) s += ", ";
    s += chart->name(idx[k]);
  }
  return s + "}";
}

std::vector<std::string> fibre_names(int rank) {
  if (rank == 1) return {"t"};
  std::vector<std::string> out;
  for (int a = 1; a <= rank; ++a) out.push_back("z" + std::to_string(a));
  return out;
}

ScalarExpr det_mat(const Mat& m) {
  const size_t n = m.size();
  if (n == 1) return m[0][0];
  ScalarExpr acc = expr_zero(m[0][0].chart());
  for (size_t j = 0; j < n; ++j) {
    Mat sub;
    for (size_t r = 1; r < n; ++r) {
      Row row;
      for (size_t c = 0; c < n; ++c)
        if (c != j) row.push_back(m[r][c]);
      sub.push_back(std::move(row));
    }
    ScalarExpr t = m[0][j] * det_mat(sub);
    acc = (j % 2 == 0) ? acc + t : acc - t;
  }
  return acc;
}

// adj[i][j] is the (j,i) cofactor, so adj * m = det(m) * Id exactly.
Mat adjugate(const Mat& m) {
  const size_t n = m.size();
  ChartPtr chart = m[0][0].chart();
  Mat adj(n, Row(n, expr_zero(chart)));
  if (n == 1) {
    adj[0][0] = expr_one(chart);
    return adj;
  }
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      Mat sub;
      for (size_t r = 0; r < n; ++r) {
        if (r == j) continue;
        Row row;
        for (size_t c = 0; c < n; ++c)
          if (c != i) row.push_back(m[r][c]);
        sub.push_back(std::move(row));
      }
      ScalarExpr d = det_mat(sub);
      adj[i][j] = ((i + j) % 2 == 0) ? d : -d;
    }
  return adj;
}

// The base block of the model: the bivector matrix twisted by the inverse of
// the unipotent-at-the-origin matrix m, as adjugate(m) * p / det(m).
Mat twisted_block(const Mat& m, const Mat& p, const ScalarExpr& det,
                  uint64_t seed, double tol) {
  const size_t n = m.size();
  ChartPtr chart = det.chart();
  Mat adj = adjugate(m);
  Mat g(n, Row(n, expr_zero(chart)));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      ScalarExpr acc = expr_zero(chart);
      for (size_t k = 0; k < n; ++k) acc = acc + adj[i][k] * p[k][j];
      g[i][j] = acc / det;
    }
  ZeroGate gate{seed, tol};
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i; j < n; ++j)
      require(gate.scalar_zero(g[i][j] + g[j][i]),
              "twisted base block failed to come out antisymmetric");
  return g;
}

}  // namespace

PoissonModel::PoissonModel(ChartPtr chart, Multivector pi,
                           ScalarExpr certificate)
    : chart_(std::move(chart)),
      pi_(std::move(pi)),
      cert_(std::move(certificate)),
      zero_(Submanifold::zero_section(chart_)) {
  require(pi_.degree() == 2 && same_chart(pi_.chart(), chart_),
          "model bivector must have degree 2 on the model chart");
  require(cert_.valid() && same_chart(cert_.chart(), chart_),
          "certificate lives on a different chart");
  require(cert_.is_polynomial() && !cert_.has_function_atoms(),
          "certificate must be a polynomial");
  ScalarExpr at_zero = zero_.restrict_to_base(cert_);
  require((at_zero - expr_one(zero_.base_chart())).is_zero(),
          "certificate must equal 1 on the zero section");

  std::vector<int> all_vars;
  for (int v = 0; v < chart_->dim(); ++v) all_vars.push_back(v);
  for (const auto& [idx, coeff] : pi_.terms()) {
    ScalarExpr den = coeff.denominator_expr();
    if (den.is_constant()) continue;
    ScalarExpr rest = zero_.restrict_to_base(den);
    require(rest.is_constant() && !rest.is_zero(),
            "coefficient denominator must be invertible on the zero section");
    int bound = std::max(1, den.max_degree_in(all_vars));
    require((cert_.pow(bound) / den).is_polynomial(),
            "coefficient denominator must divide a power of the certificate");
  }
}

PoissonModel build_local_model(const CouplingData& c, uint64_t seed,
                               double tol) {
  CheckSet pre = check_coupling(c, seed, tol);
  for (const auto& r : pre.records)
    if (!r.pass)
      throw DomainError("coupling data fails verification: " + r.name + ": " +
                        r.details);

  const int n = c.base()->dim();
  const int m = c.rank();
  std::vector<std::string> names = c.base()->names();
  for (const auto& f : fibre_names(m)) {
    require(c.base()->index(f) < 0,
            "fibre variable " + f + " collides with a base variable");
    names.push_back(f);
  }
  ChartPtr total = Chart::make_split(std::move(names), n);
  Submanifold zs = Submanifold::zero_section(total);
  auto lift = [&](const ScalarExpr& e) { return zs.include_from_base(e); };
  auto zvar = [&](int a) { return ScalarExpr::variable(total, n + a); };

  Mat p(n, Row(n, expr_zero(total)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p[i][j] = lift(c.pi_s().component({i, j}));

  Mat mm(n, Row(n, expr_zero(total)));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      ScalarExpr w = i == k ? expr_one(total) : expr_zero(total);
      for (int a = 0; a < m; ++a) w = w + lift(c.u(i, a, k)) * zvar(a);
      mm[i][k] = w;
    }

  ScalarExpr det = det_mat(mm);
  require(!det.is_zero(), "invertibility certificate vanishes identically");
  Mat g = twisted_block(mm, p, det, seed, tol);

  Mat hol(m, Row(n, expr_zero(total)));
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i) {
      ScalarExpr acc = expr_zero(total);
      for (int b = 0; b < m; ++b) acc = acc + lift(c.gamma(i, a, b)) * zvar(b);
      hol[a][i] = acc;
    }

  Multivector pi0 = Multivector::zero(total, 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      pi0 = pi0 + Multivector::term(g[i][j], {i, j});
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < m; ++a) {
      ScalarExpr coeff = expr_zero(total);
      for (int k = 0; k < n; ++k) coeff = coeff - g[i][k] * hol[a][k];
      pi0 = pi0 + Multivector::term(coeff, {i, n + a});
    }
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      ScalarExpr coeff = expr_zero(total);
      for (int cc = 0; cc < m; ++cc)
        coeff = coeff + lift(c.structure_fn(a, b, cc)) * zvar(cc);
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          coeff = coeff + hol[a][k] * g[k][l] * hol[b][l];
      pi0 = pi0 + Multivector::term(coeff, {n + a, n + b});
    }

  return PoissonModel(total, pi0, det);
}

PoissonModel build_codim1(const Codim1Triple& t, uint64_t seed, double tol) {
  CheckSet pre = check_codim1_triple(t, seed, tol);
  for (const auto& r : pre.records)
    if (!r.pass)
      throw DomainError("triple fails verification: " + r.name + ": " +
                        r.details);

  const int n = t.base()->dim();
  require(t.base()->index("t") < 0,
          "fibre variable t collides with a base variable");
  std::vector<std::string> names = t.base()->names();
  names.push_back("t");
  ChartPtr total = Chart::make_split(std::move(names), n);
  Submanifold zs = Submanifold::zero_section(total);
  auto lift = [&](const ScalarExpr& e) { return zs.include_from_base(e); };
  ScalarExpr tv = ScalarExpr::variable(total, n);

  Mat p(n, Row(n, expr_zero(total)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p[i][j] = lift(t.pi_s().component({i, j}));

  Mat mm(n, Row(n, expr_zero(total)));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      ScalarExpr w = i == k ? expr_one(total) : expr_zero(total);
      mm[i][k] = w + tv * lift(t.u()[i][k]);
    }

  ScalarExpr det = det_mat(mm);
  require(!det.is_zero(), "invertibility certificate vanishes identically");
  Mat g = twisted_block(mm, p, det, seed, tol);

  Multivector pi0 = Multivector::zero(total, 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      pi0 = pi0 + Multivector::term(g[i][j], {i, j});

  Multivector vf = Multivector::zero(total, 1);
  for (int j = 0; j < n; ++j) {
    ScalarExpr coeff = expr_zero(total);
    for (int i = 0; i < n; ++i)
      coeff = coeff + lift(t.theta().component({i})) * g[i][j];
    vf = vf + Multivector::term(coeff, {j});
  }
  pi0 = pi0 + wedge(vf, Multivector::term(tv, {n}));

  return PoissonModel(total, pi0, det);
}

CheckSet verify_local_model(const PoissonModel& m, const CouplingData& c,
                            const std::vector<std::vector<int>>& leaves,
                            uint64_t seed, double tol) {
  ChartPtr total = m.chart();
  ChartPtr base = c.base();
  const int n = base->dim();
  const int rank = c.rank();
  bool match = total->base_dim() == n && total->fiber_dim() == rank;
  for (int i = 0; match && i < n; ++i)
    if (total->name(i) != base->name(i)) match = false;
  require(match, "model chart does not match the coupling data");
  for (const auto& leaf : leaves)
    for (int i : leaf)
      require(0 <= i && i < n, "leaf request must name base variables");

  CheckSet out;

  {
    ZeroGate gate{seed, tol};
    CheckRecord rec{"jacobi", false, true, ""};
    std::vector<std::string> bad;
    Multivector obstruction = schouten(m.bivector(), m.bivector());
    for (const auto& [idx, coeff] : obstruction.terms())
      if (!gate.scalar_zero(coeff))
        bad.push_back("Jacobi defect on " + tuple_names(total, idx) + " = " +
                      coeff.str());
    rec.exact = gate.exact;
    finish(rec, bad, "bivector satisfies the Jacobi identity");
    out.add(rec);
  }

  {
    ZeroGate gate{seed, tol};
    CheckRecord rec{"jet-recovery", false, true, ""};
    std::vector<std::string> bad;
    try {
      AlgebroidData got = jet_to_algebroid(m.bivector(), m.zero_section());
      for (int al = 0; al < n + rank; ++al)
        for (int pc = 0; pc < n; ++pc) {
          ScalarExpr want =
              al < n ? c.pi_s().component({al, pc}) : expr_zero(base);
          ScalarExpr diff = got.anchor_coeff(al, pc) - want;
          if (!gate.scalar_zero(diff))
            bad.push_back("anchor defect on (" + got.frame_label(al) + "; " +
                          base->name(pc) + ") = " + diff.str());
        }
      for (int A = 0; A < n + rank; ++A)
        for (int B = A + 1; B < n + rank; ++B)
          for (int C = 0; C < n + rank; ++C) {
            ScalarExpr want = expr_zero(base);
            if (A < n && B < n && C < n)
              want = c.pi_s().component({A, B}).differentiate(C);
            if (A < n && B < n && C >= n)
              for (int k = 0; k < n; ++k)
                want = want - c.u(A, C - n, k) * c.pi_s().component({k, B});
            if (A < n && B >= n && C >= n)
              for (int k = 0; k < n; ++k)
                want =
                    want - c.pi_s().component({A, k}) * c.gamma(k, B - n, C - n);
            if (A >= n && C >= n)
              want = c.structure_fn(A - n, B - n, C - n);
            ScalarExpr diff = got.structure_fn(A, B, C) - want;
            if (!gate.scalar_zero(diff))
              bad.push_back("bracket defect on (" + got.frame_label(A) + ", " +
                            got.frame_label(B) + "; " + got.frame_label(C) +
                            ") = " + diff.str());
          }
      if (!got.has_im()) {
        bad.push_back("missing 1-form values along the zero section");
      } else {
        for (int al = 0; al < n + rank; ++al)
          for (int pc = 0; pc < n; ++pc) {
            ScalarExpr want = al == pc ? expr_one(base) : expr_zero(base);
            ScalarExpr diff = got.im()[al][pc] - want;
            if (!gate.scalar_zero(diff))
              bad.push_back("restriction defect on (" + got.frame_label(al) +
                            "; " + base->name(pc) + ") = " + diff.str());
          }
      }
    } catch (const DomainError& e) {
      bad.push_back(std::string("first-order truncation failed: ") + e.what());
    }
    rec.exact = gate.exact;
    finish(rec, bad, "zero-section data matches the coupling data");
    out.add(rec);
  }

  {
    CheckRecord rec{"leaf-tangency", false, true, ""};
    std::vector<std::string> bad;
    for (const auto& leaf : leaves) {
      Submanifold pre(total, leaf);
      CheckRecord r = check_poisson_submanifold(m.bivector(), pre, seed, tol);
      if (!r.exact) rec.exact = false;
      if (!r.pass)
        bad.push_back("not tangent over " + set_names(base, leaf) + ": " +
                      r.details);
    }
    finish(rec, bad, leaves.empty()
                         ? "no leaf requests"
                         : "tangent to every requested leaf preimage");
    out.add(rec);
  }

  return out;
}

}  // namespace plm

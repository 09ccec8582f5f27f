#include "plm/coupling.hpp"

#include <string>
#include <utility>
#include <vector>

namespace plm {

namespace {

using Row = std::vector<ScalarExpr>;
using Mat = std::vector<Row>;
using Cube = std::vector<Mat>;

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
  bool section_zero(const Section& s) {
    bool z = true;
    for (const auto& e : s)
      if (!scalar_zero(e)) z = false;
    return z;
  }
  bool form_zero(const DiffForm& w) {
    bool z = true;
    for (const auto& [idx, c] : w.terms())
      if (!scalar_zero(c)) z = false;
    return z;
  }
  bool mv_zero(const Multivector& v) {
    bool z = true;
    for (const auto& [idx, c] : v.terms())
      if (!scalar_zero(c)) z = false;
    return z;
  }
};

Mat zero_anchor(const ChartPtr& base, int rank) {
  return Mat(rank, Row(base->dim(), expr_zero(base)));
}

DiffForm coord_form(const ChartPtr& base, int i) {
  return DiffForm::term(expr_one(base), {i});
}

Multivector coord_field(const ChartPtr& base, int i) {
  return Multivector::term(expr_one(base), {i});
}

}  // namespace

CouplingData::CouplingData(ChartPtr base, Multivector pi_s, int rank, Cube structure,
                           Cube gamma, Cube u)
    : pi_s_(std::move(pi_s)),
      fibre_(base, rank, zero_anchor(base, rank), std::move(structure)),
      conn_(base, rank, std::move(gamma)),
      u_(std::move(u)) {
  require(pi_s_.degree() == 2, "base bivector must have degree 2");
  require(same_chart(pi_s_.chart(), base), "base bivector lives on a different chart");
  const int n = base->dim();
  require(static_cast<int>(u_.size()) == n,
          "coupling tensor first index must range over the chart");
  for (const auto& ua : u_) {
    require(static_cast<int>(ua.size()) == rank,
            "coupling tensor middle index must range over the fibre frame");
    for (const auto& uj : ua) {
      require(static_cast<int>(uj.size()) == n,
              "coupling tensor last index must range over the chart");
      for (const auto& e : uj)
        require(e.valid() && same_chart(e.chart(), base),
                "coupling tensor entry lives on a different chart");
    }
  }

  // fibrewise Jacobi identity of the structure functions (the anchor is
  // zero, so the jacobiator is a pure contraction of C against itself)
  for (int a = 0; a < rank; ++a)
    for (int b = a + 1; b < rank; ++b)
      for (int c = b + 1; c < rank; ++c) {
        Section j1 = fibre_.bracket(fibre_.basis(a),
                                    fibre_.bracket(fibre_.basis(b), fibre_.basis(c)));
        Section j2 = fibre_.bracket(fibre_.basis(b),
                                    fibre_.bracket(fibre_.basis(c), fibre_.basis(a)));
        Section j3 = fibre_.bracket(fibre_.basis(c),
                                    fibre_.bracket(fibre_.basis(a), fibre_.basis(b)));
        for (int e = 0; e < rank; ++e)
          require(zero_verdict(j1[e] + j2[e] + j3[e]).zero,
                  "fibre structure functions fail the Jacobi identity");
      }

  Multivector obstruction = schouten(pi_s_, pi_s_);
  for (const auto& [idx, coeff] : obstruction.terms())
    require(zero_verdict(coeff).zero, "base bivector is not Poisson");
}

ScalarExpr CouplingData::u(int i, int a, int j) const {
  const int n = base()->dim();
  require(i >= 0 && i < n && j >= 0 && j < n && a >= 0 && a < rank(),
          "coupling tensor index out of range");
  return u_[i][a][j];
}

Section CouplingData::u_eval(const DiffForm& alpha, const Multivector& x) const {
  require(alpha.degree() == 1 && x.degree() == 1,
          "coupling tensor pairs a 1-form with a vector field");
  require(same_chart(alpha.chart(), base()) && same_chart(x.chart(), base()),
          "argument lives on a different chart");
  Section out(rank(), expr_zero(base()));
  for (const auto& [ai, ac] : alpha.terms())
    for (const auto& [xj, xc] : x.terms()) {
      const ScalarExpr f = ac * xc;
      for (int a = 0; a < rank(); ++a) out[a] += f * u_[ai[0]][a][xj[0]];
    }
  return out;
}

CheckSet check_coupling(const CouplingData& c, uint64_t seed, double tol) {
  CheckSet out;
  const ChartPtr base = c.base();
  const int n = base->dim();
  const int r = c.rank();
  const AlgebroidData& k = c.fibre();
  const Connection& conn = c.connection();
  const Multivector& pi = c.pi_s();

  {
    CheckRecord rec;
    rec.name = "bracket-parallel";
    ZeroGate gate{seed, tol};
    std::vector<std::string> bad;
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < r; ++a)
        for (int b = a + 1; b < r; ++b) {
          Section res = conn.nabla(i, k.bracket(k.basis(a), k.basis(b)));
          Section m1 = k.bracket(conn.nabla(i, k.basis(a)), k.basis(b));
          Section m2 = k.bracket(k.basis(a), conn.nabla(i, k.basis(b)));
          for (int e = 0; e < r; ++e) res[e] = res[e] - m1[e] - m2[e];
          if (!gate.section_zero(res))
            bad.push_back("bracket defect along " + base->name(i) + " on (" +
                          k.frame_label(a) + "," + k.frame_label(b) +
                          ") = " + k.section_str(res));
        }
    rec.exact = gate.exact;
    finish(rec, bad, "connection preserves the fibre bracket");
    out.add(rec);
  }

  {
    CheckRecord rec;
    rec.name = "connection-curvature";
    ZeroGate gate{seed, tol};
    std::vector<std::string> bad;
    for (int i = 0; i < n; ++i) {
      const Multivector sh = sharp(pi, coord_form(base, i));
      for (int j = 0; j < n; ++j) {
        const Multivector lb = lie(sh, coord_field(base, j));
        const Section uval = c.u_eval(coord_form(base, i), coord_field(base, j));
        for (int a = 0; a < r; ++a) {
          Section res = conn.nabla(sh, conn.nabla(j, k.basis(a)));
          Section m1 = conn.nabla(j, conn.nabla(sh, k.basis(a)));
          Section m2 = conn.nabla(lb, k.basis(a));
          Section m3 = k.bracket(uval, k.basis(a));
          for (int e = 0; e < r; ++e) res[e] = res[e] - m1[e] - m2[e] - m3[e];
          if (!gate.section_zero(res))
            bad.push_back("curvature defect on (d" + base->name(i) + ", " +
                          base->name(j) + "; " + k.frame_label(a) +
                          ") = " + k.section_str(res));
        }
      }
    }
    rec.exact = gate.exact;
    finish(rec, bad, "curvature matches the coupling tensor");
    out.add(rec);
  }

  {
    CheckRecord rec;
    rec.name = "mixed-cocycle";
    ZeroGate gate{seed, tol};
    std::vector<std::string> bad;
    for (int i = 0; i < n; ++i) {
      const Multivector sh_i = sharp(pi, coord_form(base, i));
      for (int j = 0; j < n; ++j) {
        const Multivector sh_j = sharp(pi, coord_form(base, j));
        const DiffForm kos = cotangent_bracket(pi, coord_form(base, i), coord_form(base, j));
        for (int w = 0; w < n; ++w) {
          const Multivector dw = coord_field(base, w);
          Section res = conn.nabla(sh_i, c.u_eval(coord_form(base, j), dw));
          Section m1 = conn.nabla(sh_j, c.u_eval(coord_form(base, i), dw));
          Section m2 = conn.nabla(w, c.u_eval(coord_form(base, i), sh_j));
          Section m3 = c.u_eval(coord_form(base, i), lie(sh_j, dw));
          Section m4 = c.u_eval(coord_form(base, j), lie(sh_i, dw));
          Section m5 = c.u_eval(kos, dw);
          for (int e = 0; e < r; ++e)
            res[e] = res[e] - m1[e] + m2[e] + m3[e] - m4[e] - m5[e];
          if (!gate.section_zero(res))
            bad.push_back("cocycle defect on (d" + base->name(i) + ", d" +
                          base->name(j) + "; " + base->name(w) +
                          ") = " + k.section_str(res));
        }
      }
    }
    rec.exact = gate.exact;
    finish(rec, bad, "cocycle equation holds");
    out.add(rec);
  }

  {
    CheckRecord rec;
    rec.name = "skew-pairing";
    ZeroGate gate{seed, tol};
    std::vector<std::string> bad;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        for (int a = 0; a < r; ++a) {
          ScalarExpr res = expr_zero(base);
          for (int w = 0; w < n; ++w)
            res += c.u(i, a, w) * pi.component({j, w}) +
                   c.u(j, a, w) * pi.component({i, w});
          if (!gate.scalar_zero(res))
            bad.push_back("skew defect on (d" + base->name(i) + ", d" +
                          base->name(j) + "; " + k.frame_label(a) +
                          ") = " + res.str());
        }
    rec.exact = gate.exact;
    finish(rec, bad, "skew pairing vanishes");
    out.add(rec);
  }

  return out;
}

Codim1Triple::Codim1Triple(ChartPtr base, Multivector pi_s, Multivector v,
                           Multivector lambda0, DiffForm theta, Multivector z, Mat u)
    : base_(std::move(base)),
      pi_s_(std::move(pi_s)),
      v_(std::move(v)),
      lambda0_(std::move(lambda0)),
      theta_(std::move(theta)),
      z_(std::move(z)),
      u_(std::move(u)) {
  require(pi_s_.degree() == 2 && same_chart(pi_s_.chart(), base_),
          "base bivector must have degree 2 on the chart");
  require(v_.degree() == 1 && same_chart(v_.chart(), base_),
          "v must be a vector field on the chart");
  require(lambda0_.degree() == 2 && same_chart(lambda0_.chart(), base_),
          "lambda0 must be a bivector on the chart");
  require(theta_.degree() == 1 && same_chart(theta_.chart(), base_),
          "theta must be a 1-form on the chart");
  require(z_.degree() == 1 && same_chart(z_.chart(), base_),
          "z must be a vector field on the chart");
  const int n = base_->dim();
  require(static_cast<int>(u_.size()) == n,
          "endomorphism must be a square matrix over the chart");
  for (const auto& row : u_) {
    require(static_cast<int>(row.size()) == n,
            "endomorphism must be a square matrix over the chart");
    for (const auto& e : row)
      require(e.valid() && same_chart(e.chart(), base_),
              "endomorphism entry lives on a different chart");
  }
}

DiffForm Codim1Triple::u_of(const DiffForm& alpha) const {
  require(alpha.degree() == 1 && same_chart(alpha.chart(), base_),
          "endomorphism applies to 1-forms on the chart");
  DiffForm out = DiffForm::zero(base_, 1);
  for (const auto& [idx, c] : alpha.terms())
    for (int j = 0; j < base_->dim(); ++j)
      out = out + DiffForm::term(c * u_[idx[0]][j], {j});
  return out;
}

CheckSet check_codim1_triple(const Codim1Triple& t, uint64_t seed, double tol) {
  CheckSet out;
  const ChartPtr base = t.base();
  const int n = base->dim();
  const Multivector& pi = t.pi_s();

  {
    CheckRecord rec;
    rec.name = "sharp-match";
    ZeroGate gate{seed, tol};
    std::vector<std::string> bad;
    Multivector res = sharp(pi, t.theta()) - t.v();
    if (!gate.mv_zero(res)) bad.push_back("pi#(theta) - v = " + res.str());
    rec.exact = gate.exact;
    finish(rec, bad, "pi#(theta) agrees with v");
    out.add(rec);
  }

  {
    CheckRecord rec;
    rec.name = "transgression-split";
    ZeroGate gate{seed, tol};
    std::vector<std::string> bad;
    Multivector dz = schouten(pi, t.z());
    for (int i = 0; i < n; ++i) {
      const DiffForm ui = t.u_of(coord_form(base, i));
      for (int j = 0; j < n; ++j) {
        const ScalarExpr lhs = interior(sharp(pi, coord_form(base, j)), ui).component({});
        const ScalarExpr res =
            lhs - t.lambda0().component({i, j}) - dz.component({i, j});
        if (!gate.scalar_zero(res))
          bad.push_back("split defect on (d" + base->name(i) + ", d" +
                        base->name(j) + ") = " + res.str());
      }
    }
    rec.exact = gate.exact;
    finish(rec, bad, "transgression bivector splits through lambda0 and z");
    out.add(rec);
  }

  {
    CheckRecord rec;
    rec.name = "leafwise-closed (S2'')";
    ZeroGate gate{seed, tol};
    std::vector<std::string> bad;
    const DiffForm dtheta = d(t.theta());
    for (int i = 0; i < n; ++i) {
      DiffForm res = interior(sharp(pi, coord_form(base, i)), dtheta);
      if (!gate.form_zero(res))
        bad.push_back("contraction of d(theta) along pi#(d" + base->name(i) +
                      ") = " + res.str());
    }
    rec.exact = gate.exact;
    finish(rec, bad, "theta is closed along the leaves");
    out.add(rec);
  }

  {
    CheckRecord rec;
    rec.name = "mixed-cocycle (S3'')";
    ZeroGate gate{seed, tol};
    std::vector<std::string> bad;
    for (int i = 0; i < n; ++i) {
      const DiffForm ui = t.u_of(coord_form(base, i));
      const Multivector sh_i = sharp(pi, coord_form(base, i));
      for (int j = 0; j < n; ++j) {
        const DiffForm uj = t.u_of(coord_form(base, j));
        const Multivector sh_j = sharp(pi, coord_form(base, j));
        const DiffForm lhs =
            t.u_of(cotangent_bracket(pi, coord_form(base, i), coord_form(base, j)));
        const DiffForm t1 = lie(sh_i, uj);
        const DiffForm t2 = interior(sh_j, d(ui));
        const DiffForm t3 = pairing(pi, ui, coord_form(base, j)) * t.theta();
        const DiffForm t4 = pairing(pi, t.theta(), coord_form(base, i)) * uj;
        const DiffForm t5 = pairing(pi, t.theta(), coord_form(base, j)) * ui;
        const DiffForm res = lhs - t1 + t2 - t3 - t4 + t5;
        if (!gate.form_zero(res))
          bad.push_back("cocycle defect on (d" + base->name(i) + ", d" +
                        base->name(j) + ") = " + res.str());
      }
    }
    rec.exact = gate.exact;
    finish(rec, bad, "cocycle equation holds");
    out.add(rec);
  }

  return out;
}

CouplingData couplingdata_from_codim1(const Codim1Triple& t, uint64_t seed,
                                      double tol) {
  CheckSet checks = check_codim1_triple(t, seed, tol);
  if (!checks.all_pass()) {
    std::string why;
    for (const auto& r : checks.records)
      if (!r.pass) {
        why = r.name + ": " + r.details;
        break;
      }
    throw DomainError("triple fails verification: " + why);
  }
  const ChartPtr base = t.base();
  const int n = base->dim();
  Cube structure(1, Mat(1, Row(1, expr_zero(base))));
  Cube gamma(n, Mat(1, Row(1, expr_zero(base))));
  for (int i = 0; i < n; ++i) gamma[i][0][0] = t.theta().component({i});
  Cube u(n, Mat(1, Row(n, expr_zero(base))));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) u[i][0][j] = t.u()[i][j];
  return CouplingData(base, t.pi_s(), 1, std::move(structure), std::move(gamma),
                      std::move(u));
}

}  // namespace plm

#include "plm/algebroid.hpp"

#include <sstream>

namespace plm {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw DomainError(msg);
}

ScalarExpr dirderiv(const Multivector& x, const ScalarExpr& f) {
  ScalarExpr acc = expr_zero(f.chart());
  for (const auto& [idx, coeff] : x.terms())
    acc += coeff * f.differentiate(idx[0]);
  return acc;
}

// small dense polynomial with integer coefficients, for exact seeded probes
ScalarExpr random_scalar_poly(const ChartPtr& chart, Rng& rng) {
  ScalarExpr acc = ScalarExpr::constant(chart, 1 + static_cast<long>(rng.below(5)));
  for (int t = 0; t < 2; ++t) {
    long c = static_cast<long>(rng.below(7)) - 3;
    if (c == 0) continue;
    ScalarExpr m = ScalarExpr::constant(chart, c);
    int deg = 1 + static_cast<int>(rng.below(2));
    for (int k = 0; k < deg && chart->dim() > 0; ++k)
      m *= ScalarExpr::variable(chart, static_cast<int>(rng.below(chart->dim())));
    acc += m;
  }
  return acc;
}

}  // namespace

AlgebroidData::AlgebroidData(
    ChartPtr base, int rank, std::vector<std::vector<ScalarExpr>> anchor,
    std::vector<std::vector<std::vector<ScalarExpr>>> structure,
    std::vector<std::string> frame, std::vector<std::vector<ScalarExpr>> im)
    : base_(std::move(base)),
      rank_(rank),
      anchor_(std::move(anchor)),
      structure_(std::move(structure)),
      frame_(std::move(frame)),
      im_(std::move(im)) {
  require(rank_ >= 0, "rank must be nonnegative");
  const size_t r = static_cast<size_t>(rank_);
  const size_t n = static_cast<size_t>(base_->dim());
  require(anchor_.size() == r, "anchor needs one row per frame element");
  for (const auto& row : anchor_) {
    require(row.size() == n, "anchor row length must match the chart");
    for (const auto& e : row)
      require(same_chart(e.chart(), base_), "anchor entry on a foreign chart");
  }
  require(structure_.size() == r, "structure functions must be rank^3");
  for (const auto& plane : structure_) {
    require(plane.size() == r, "structure functions must be rank^3");
    for (const auto& row : plane) {
      require(row.size() == r, "structure functions must be rank^3");
      for (const auto& e : row)
        require(same_chart(e.chart(), base_),
                "structure entry on a foreign chart");
    }
  }
  for (size_t a = 0; a < r; ++a)
    for (size_t b = 0; b <= a; ++b)
      for (size_t c = 0; c < r; ++c)
        require((structure_[a][b][c] + structure_[b][a][c]).is_zero(),
                "structure functions must be antisymmetric in the lower pair");
  if (frame_.empty())
    for (int a = 1; a <= rank_; ++a) frame_.push_back("e" + std::to_string(a));
  require(frame_.size() == r, "frame labels must match the rank");
  if (!im_.empty()) {
    require(im_.size() == r, "1-form values need one row per frame element");
    for (const auto& row : im_) {
      require(row.size() == n, "1-form value row length must match the chart");
      for (const auto& e : row)
        require(same_chart(e.chart(), base_),
                "1-form value on a foreign chart");
    }
  }
}

ScalarExpr AlgebroidData::structure_fn(int a, int b, int c) const {
  return structure_.at(a).at(b).at(c);
}

ScalarExpr AlgebroidData::anchor_coeff(int a, int i) const {
  return anchor_.at(a).at(i);
}

Multivector AlgebroidData::rho(int a) const {
  Multivector x = Multivector::zero(base_, 1);
  for (int i = 0; i < base_->dim(); ++i)
    x = x + Multivector::term(anchor_.at(a)[i], {i});
  return x;
}

DiffForm AlgebroidData::mu(int a) const {
  require(has_im(), "no 1-form values attached");
  DiffForm w = DiffForm::zero(base_, 1);
  for (int i = 0; i < base_->dim(); ++i)
    w = w + DiffForm::term(im_.at(a)[i], {i});
  return w;
}

Section AlgebroidData::basis(int a) const {
  Section s(rank_, expr_zero(base_));
  s.at(a) = expr_one(base_);
  return s;
}

Section AlgebroidData::zero_section() const {
  return Section(rank_, expr_zero(base_));
}

bool AlgebroidData::is_zero_section(const Section& s) const {
  for (const auto& e : s)
    if (!e.is_zero()) return false;
  return true;
}

std::string AlgebroidData::section_str(const Section& s) const {
  std::ostringstream os;
  bool first = true;
  for (int a = 0; a < rank_; ++a) {
    if (s.at(a).is_zero()) continue;
    if (!first) os << " + ";
    first = false;
    if (s[a].equals(expr_one(base_))) {
      os << frame_[a];
      continue;
    }
    std::string c = s[a].str();
    bool wrap = c.find(' ') != std::string::npos;
    os << (wrap ? "(" : "") << c << (wrap ? ")" : "") << "*" << frame_[a];
  }
  return first ? "0" : os.str();
}

Multivector AlgebroidData::anchor_of(const Section& s) const {
  require(s.size() == static_cast<size_t>(rank_), "section length mismatch");
  Multivector x = Multivector::zero(base_, 1);
  for (int a = 0; a < rank_; ++a) x = x + s[a] * rho(a);
  return x;
}

DiffForm AlgebroidData::mu_of(const Section& s) const {
  require(s.size() == static_cast<size_t>(rank_), "section length mismatch");
  DiffForm w = DiffForm::zero(base_, 1);
  for (int a = 0; a < rank_; ++a) w = w + s[a] * mu(a);
  return w;
}

Section AlgebroidData::bracket(const Section& s, const Section& t) const {
  require(s.size() == static_cast<size_t>(rank_) &&
              t.size() == static_cast<size_t>(rank_),
          "section length mismatch");
  Multivector xs = anchor_of(s), xt = anchor_of(t);
  Section out = zero_section();
  for (int c = 0; c < rank_; ++c) {
    ScalarExpr acc = expr_zero(base_);
    for (int a = 0; a < rank_; ++a)
      for (int b = 0; b < rank_; ++b) {
        const ScalarExpr& cf = structure_[a][b][c];
        if (cf.is_zero()) continue;
        acc += s[a] * t[b] * cf;
      }
    acc += dirderiv(xs, t[c]) - dirderiv(xt, s[c]);
    out[c] = acc;
  }
  return out;
}

Connection::Connection(ChartPtr base, int rank,
                       std::vector<std::vector<std::vector<ScalarExpr>>> gamma)
    : base_(std::move(base)), rank_(rank), gamma_(std::move(gamma)) {
  require(rank_ >= 0, "rank must be nonnegative");
  require(gamma_.size() == static_cast<size_t>(base_->dim()),
          "connection needs one plane per chart variable");
  for (const auto& plane : gamma_) {
    require(plane.size() == static_cast<size_t>(rank_),
            "connection plane must be rank x rank");
    for (const auto& row : plane) {
      require(row.size() == static_cast<size_t>(rank_),
              "connection plane must be rank x rank");
      for (const auto& e : row)
        require(same_chart(e.chart(), base_),
                "connection entry on a foreign chart");
    }
  }
}

Connection Connection::flat(ChartPtr base, int rank) {
  auto zero = expr_zero(base);
  std::vector<std::vector<std::vector<ScalarExpr>>> gamma(
      base->dim(), std::vector<std::vector<ScalarExpr>>(
                       rank, std::vector<ScalarExpr>(rank, zero)));
  return Connection(std::move(base), rank, std::move(gamma));
}

ScalarExpr Connection::gamma(int i, int a, int b) const {
  return gamma_.at(i).at(a).at(b);
}

Section Connection::nabla(int i, const Section& s) const {
  require(s.size() == static_cast<size_t>(rank_), "section length mismatch");
  Section out(rank_, expr_zero(base_));
  for (int c = 0; c < rank_; ++c) {
    ScalarExpr acc = s[c].differentiate(i);
    for (int a = 0; a < rank_; ++a) acc += s[a] * gamma_[i][a][c];
    out[c] = acc;
  }
  return out;
}

Section Connection::nabla(const Multivector& x, const Section& s) const {
  require(x.degree() == 1 && same_chart(x.chart(), base_),
          "direction must be a vector field on the base chart");
  Section out(rank_, expr_zero(base_));
  for (const auto& [idx, coeff] : x.terms()) {
    Section part = nabla(idx[0], s);
    for (int c = 0; c < rank_; ++c) out[c] += coeff * part[c];
  }
  return out;
}

Splitting::Splitting(ChartPtr base, int rank, std::vector<int> kernel,
                     std::vector<std::vector<ScalarExpr>> l)
    : base_(std::move(base)),
      rank_(rank),
      kernel_(std::move(kernel)),
      l_(std::move(l)) {
  require(rank_ >= 0, "rank must be nonnegative");
  std::vector<bool> in_kernel(rank_, false);
  for (int k : kernel_) {
    require(k >= 0 && k < rank_, "kernel index out of range");
    require(!in_kernel[k], "duplicate kernel index");
    in_kernel[k] = true;
  }
  require(l_.size() == static_cast<size_t>(rank_),
          "projection matrix must be rank x rank");
  for (const auto& row : l_) {
    require(row.size() == static_cast<size_t>(rank_),
            "projection matrix must be rank x rank");
    for (const auto& e : row)
      require(same_chart(e.chart(), base_),
              "projection entry on a foreign chart");
  }
  for (int a = 0; a < rank_; ++a)
    for (int b = 0; b < rank_; ++b) {
      if (!in_kernel[b])
        require(l_[a][b].is_zero(),
                "projection image must lie in the designated span");
      if (in_kernel[a]) {
        ScalarExpr want = a == b ? expr_one(base_) : expr_zero(base_);
        require(l_[a][b].equals(want),
                "projection must restrict to the identity on the span");
      }
    }
}

Splitting Splitting::projection(ChartPtr base, int rank,
                                std::vector<int> kernel) {
  std::vector<std::vector<ScalarExpr>> l(
      rank, std::vector<ScalarExpr>(rank, expr_zero(base)));
  for (int k : kernel) {
    require(k >= 0 && k < rank, "kernel index out of range");
    l[k][k] = expr_one(base);
  }
  return Splitting(std::move(base), rank, std::move(kernel), std::move(l));
}

ScalarExpr Splitting::entry(int a, int b) const { return l_.at(a).at(b); }

Section Splitting::apply(const Section& s) const {
  require(s.size() == static_cast<size_t>(rank_), "section length mismatch");
  Section out(rank_, expr_zero(base_));
  for (int b = 0; b < rank_; ++b)
    for (int a = 0; a < rank_; ++a) out[b] += s[a] * l_[a][b];
  return out;
}

AlgebroidData jet_to_algebroid(const JetClass& jet) {
  const Submanifold& s = jet.submanifold();
  const Multivector& rep = jet.representative();
  CheckRecord so = check_second_order(rep, s, 0, 1e-9);
  if (!so.pass)
    throw DomainError("first jet fails the second-order condition: " +
                      so.details);
  ChartPtr full = s.chart();
  ChartPtr base = s.base_chart();
  const int n = full->dim();
  const int nt = s.tangent_dim();

  std::vector<int> ord;  // frame order: tangent differentials, then normal
  for (int i : s.tangent_indices()) ord.push_back(i);
  for (int i : s.normal_indices()) ord.push_back(i);

  std::vector<std::string> frame;
  for (int a = 0; a < n; ++a) frame.push_back("d" + full->name(ord[a]));

  std::vector<std::vector<ScalarExpr>> anchor(
      n, std::vector<ScalarExpr>(nt, expr_zero(base)));
  for (int a = 0; a < n; ++a) {
    Multivector xa = sharp(rep, DiffForm::term(expr_one(full), {ord[a]}));
    for (int p = 0; p < nt; ++p)
      anchor[a][p] =
          s.restrict_to_base(xa.component({s.tangent_indices()[p]}));
  }

  auto zero = expr_zero(base);
  std::vector<std::vector<std::vector<ScalarExpr>>> structure(
      n, std::vector<std::vector<ScalarExpr>>(
             n, std::vector<ScalarExpr>(n, zero)));
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      DiffForm br = cotangent_bracket(rep, DiffForm::term(expr_one(full), {ord[a]}),
                                      DiffForm::term(expr_one(full), {ord[b]}));
      for (int c = 0; c < n; ++c) {
        ScalarExpr v = s.restrict_to_base(br.component({ord[c]}));
        structure[a][b][c] = v;
        structure[b][a][c] = -v;
      }
    }

  std::vector<std::vector<ScalarExpr>> im(n,
                                          std::vector<ScalarExpr>(nt, zero));
  for (int p = 0; p < nt; ++p) im[p][p] = expr_one(base);

  return AlgebroidData(base, n, std::move(anchor), std::move(structure),
                       std::move(frame), std::move(im));
}

AlgebroidData jet_to_algebroid(const Multivector& pi, const Submanifold& s) {
  return jet_to_algebroid(jet_truncate(pi, s));
}

namespace {

// gather residual descriptions; a passing record gets the fallback text
void finish(CheckRecord& rec, const std::vector<std::string>& bad,
            const char* ok) {
  rec.pass = bad.empty();
  if (rec.pass) {
    rec.details = ok;
    return;
  }
  std::ostringstream os;
  for (size_t i = 0; i < bad.size(); ++i) os << (i ? "; " : "") << bad[i];
  rec.details = os.str();
}

}  // namespace

CheckSet check_jacobi(const AlgebroidData& a, uint64_t seed) {
  CheckSet out;
  const int r = a.rank();

  CheckRecord morph;
  morph.name = "anchor-morphism";
  std::vector<std::string> bad;
  for (int p = 0; p < r; ++p)
    for (int q = p + 1; q < r; ++q) {
      Multivector res =
          a.anchor_of(a.bracket(a.basis(p), a.basis(q))) -
          lie(a.rho(p), a.rho(q));
      if (!res.is_zero())
        bad.push_back("rho[" + a.frame_label(p) + "," + a.frame_label(q) +
                      "] - [rho " + a.frame_label(p) + ", rho " +
                      a.frame_label(q) + "] = " + res.str());
    }
  finish(morph, bad, "anchor intertwines brackets");
  out.add(morph);

  CheckRecord jac;
  jac.name = "jacobiator";
  bad.clear();
  for (int p = 0; p < r; ++p)
    for (int q = p + 1; q < r; ++q)
      for (int w = q + 1; w < r; ++w) {
        Section ep = a.basis(p), eq = a.basis(q), ew = a.basis(w);
        Section j = a.bracket(ep, a.bracket(eq, ew));
        Section j2 = a.bracket(eq, a.bracket(ew, ep));
        Section j3 = a.bracket(ew, a.bracket(ep, eq));
        for (int c = 0; c < r; ++c) j[c] += j2[c] + j3[c];
        if (!a.is_zero_section(j))
          bad.push_back("J(" + a.frame_label(p) + "," + a.frame_label(q) +
                        "," + a.frame_label(w) + ") = " + a.section_str(j));
      }
  finish(jac, bad, "frame Jacobi identity holds");
  out.add(jac);

  CheckRecord probes;
  probes.name = "leibniz-probes";
  probes.pass = true;
  if (r >= 2) {
    Rng rng = Rng::stream(seed, 0x616c);
    int done = 0;
    for (int t = 0; t < 6 && probes.pass; ++t) {
      int p = static_cast<int>(rng.below(r));
      int q = static_cast<int>(rng.below(r));
      int w = static_cast<int>(rng.below(r));
      if (q == p) q = (p + 1) % r;
      Section sp = a.basis(p), sq = a.basis(q), sw = a.basis(w);
      for (int c = 0; c < r; ++c) {
        sp[c] = sp[c] * random_scalar_poly(a.base(), rng);
        sq[c] = sq[c] * random_scalar_poly(a.base(), rng);
      }
      Section j = a.bracket(sp, a.bracket(sq, sw));
      Section j2 = a.bracket(sq, a.bracket(sw, sp));
      Section j3 = a.bracket(sw, a.bracket(sp, sq));
      for (int c = 0; c < r; ++c) j[c] += j2[c] + j3[c];
      ++done;
      if (!a.is_zero_section(j)) {
        probes.pass = false;
        probes.details = "scaled-section Jacobi residual " + a.section_str(j);
      }
    }
    if (probes.pass)
      probes.details = std::to_string(done) + " scaled-section probes";
  } else {
    probes.details = "rank below 2, nothing to probe";
  }
  out.add(probes);
  return out;
}

CheckSet check_closed_im(const AlgebroidData& a, uint64_t seed) {
  if (!a.has_im()) throw DomainError("no 1-form values attached");
  CheckSet out;
  const int r = a.rank();

  CheckRecord anti;
  anti.name = "im-antisymmetry";
  std::vector<std::string> bad;
  for (int p = 0; p < r; ++p)
    for (int q = p; q < r; ++q) {
      DiffForm res = interior(a.rho(q), a.mu(p)) + interior(a.rho(p), a.mu(q));
      if (!res.is_zero())
        bad.push_back("pairing of " + a.frame_label(p) + " against " +
                      a.frame_label(q) + " symmetrizes to " + res.str());
    }
  finish(anti, bad, "anchor pairings are antisymmetric");
  out.add(anti);

  CheckRecord brk;
  brk.name = "im-bracket";
  bad.clear();
  for (int p = 0; p < r; ++p)
    for (int q = 0; q < r; ++q) {
      if (p == q) continue;
      DiffForm res = a.mu_of(a.bracket(a.basis(p), a.basis(q))) -
                     lie(a.rho(p), a.mu(q)) + interior(a.rho(q), d(a.mu(p)));
      if (!res.is_zero())
        bad.push_back("bracket equation residual on (" + a.frame_label(p) +
                      "," + a.frame_label(q) + ") = " + res.str());
    }
  finish(brk, bad, "1-form values intertwine brackets");
  out.add(brk);

  CheckRecord probes;
  probes.name = "im-probes";
  probes.pass = true;
  if (r >= 2) {
    Rng rng = Rng::stream(seed, 0x696d);
    int done = 0;
    for (int t = 0; t < 6 && probes.pass; ++t) {
      int p = static_cast<int>(rng.below(r));
      int q = static_cast<int>(rng.below(r));
      if (q == p) q = (p + 1) % r;
      Section sp = a.basis(p);
      for (int c = 0; c < r; ++c)
        sp[c] = sp[c] * random_scalar_poly(a.base(), rng);
      DiffForm res = a.mu_of(a.bracket(sp, a.basis(q))) -
                     lie(a.anchor_of(sp), a.mu(q)) +
                     interior(a.rho(q), d(a.mu_of(sp)));
      ++done;
      if (!res.is_zero()) {
        probes.pass = false;
        probes.details = "scaled-section residual " + res.str();
      }
    }
    if (probes.pass)
      probes.details = std::to_string(done) + " scaled-section probes";
  } else {
    probes.details = "rank below 2, nothing to probe";
  }
  out.add(probes);
  return out;
}

Section basic_curvature(const AlgebroidData& a, const Connection& conn,
                        int ea, int eb, int i) {
  require(same_chart(a.base(), conn.base()) && a.rank() == conn.rank(),
          "connection does not match the anchored structure");
  require(ea >= 0 && ea < a.rank() && eb >= 0 && eb < a.rank(),
          "frame index out of range");
  require(i >= 0 && i < a.base()->dim(), "chart index out of range");
  const int r = a.rank();
  Section sa = a.basis(ea), sb = a.basis(eb);

  Section t1 = conn.nabla(i, a.bracket(sa, sb));
  Section t2 = a.bracket(conn.nabla(i, sa), sb);
  Section t3 = a.bracket(sa, conn.nabla(i, sb));

  // derivative of the i-th coordinate field along a frame element
  auto coordinate_derivative = [&](int e) {
    Multivector y = Multivector::zero(a.base(), 1);
    for (int c = 0; c < r; ++c) y = y + conn.gamma(i, e, c) * a.rho(c);
    for (int j = 0; j < a.base()->dim(); ++j)
      y = y - Multivector::term(a.anchor_coeff(e, j).differentiate(i), {j});
    return y;
  };
  Section t4 = conn.nabla(coordinate_derivative(eb), sa);
  Section t5 = conn.nabla(coordinate_derivative(ea), sb);

  Section out(r, expr_zero(a.base()));
  for (int c = 0; c < r; ++c)
    out[c] = t1[c] - t2[c] - t3[c] - t4[c] + t5[c];
  return out;
}

CheckSet check_cartan_splitting(const AlgebroidData& a, const Connection& conn,
                                const Splitting& l) {
  require(same_chart(a.base(), conn.base()) && a.rank() == conn.rank(),
          "connection does not match the anchored structure");
  require(a.rank() == l.rank(), "projection does not match the rank");
  if (a.has_im())
    for (int k : l.kernel())
      require(a.rho(k).is_zero() && a.mu(k).is_zero(),
              "designated span must be invisible to the anchor and the "
              "1-form values");

  CheckSet out;
  const int r = a.rank();

  CheckRecord inv;
  inv.name = "projection-invariance";
  std::vector<std::string> bad;
  for (int p = 0; p < r; ++p)
    for (int q = 0; q < r; ++q) {
      Section sp = a.basis(p), sq = a.basis(q);
      Section res = a.bracket(sp, l.apply(sq));
      Section sub = l.apply(a.bracket(sp, sq));
      Section cor = l.apply(conn.nabla(a.rho(q), sp));
      for (int c = 0; c < r; ++c) res[c] -= sub[c] + cor[c];
      if (!a.is_zero_section(res))
        bad.push_back("derivative of the projection along (" +
                      a.frame_label(p) + "," + a.frame_label(q) +
                      ") = " + a.section_str(res));
    }
  finish(inv, bad, "projection is invariant");
  out.add(inv);

  CheckRecord curv;
  curv.name = "projected-curvature";
  bad.clear();
  for (int p = 0; p < r; ++p)
    for (int q = p + 1; q < r; ++q)
      for (int i = 0; i < a.base()->dim(); ++i) {
        Section res = l.apply(basic_curvature(a, conn, p, q, i));
        if (!a.is_zero_section(res))
          bad.push_back("projected curvature on (" + a.frame_label(p) + "," +
                        a.frame_label(q) + "; " + a.base()->name(i) +
                        ") = " + a.section_str(res));
      }
  finish(curv, bad, "projected curvature vanishes");
  out.add(curv);
  return out;
}

}  // namespace plm

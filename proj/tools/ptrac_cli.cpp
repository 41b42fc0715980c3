// Command-line driver.  One config file describes one geometry; commands
// compose through files.  Every run writes its outputs plus a manifest
// recording the command, a hash of the config text and arguments, and the
// tolerances, so identical manifests reproduce byte-identical files.
//
// Exit codes: 0 success, 1 validation error (flags, schema, symmetry),
// 2 numerical failure (shooting divergence, residual over tolerance).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "ptrac/bgg.hpp"
#include "ptrac/cone.hpp"
#include "ptrac/config.hpp"
#include "ptrac/csv.hpp"
#include "ptrac/geometry.hpp"
#include "ptrac/model.hpp"
#include "ptrac/normal_frame.hpp"
#include "ptrac/strat.hpp"
#include "ptrac/tractor.hpp"

namespace {

using ptrac::ChartGeometry;
using ptrac::CsvWriter;
using ptrac::fmt17;
using ptrac::ModelTensor;
using ptrac::TensorFamily;
using ptrac::TractorField;
using ptrac::ValidationError;
using ptrac::Vec;

Vec parse_point(const std::string& text, const char* flag) {
  Vec out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = text.find(',', pos);
    const std::string part =
        text.substr(pos, next == std::string::npos ? next : next - pos);
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != part.size() || part.empty())
      throw ValidationError(std::string(flag) + ": bad number '" + part +
                            "' in '" + text + "'");
    out.push_back(v);
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

ptrac::GridSpec parse_grid(const std::string& text) {
  ptrac::GridSpec g;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = text.find(';', pos);
    const std::string axis =
        text.substr(pos, next == std::string::npos ? next : next - pos);
    const Vec parts = parse_point(
        [&] {
          std::string s = axis;
          for (char& c : s)
            if (c == ':') c = ',';
          return s;
        }(),
        "--grid");
    if (parts.size() != 3 || parts[2] != int(parts[2]) || parts[2] < 2)
      throw ValidationError("--grid: axis '" + axis +
                            "' must be lo:hi:count with count >= 2");
    g.lo.push_back(parts[0]);
    g.hi.push_back(parts[1]);
    g.counts.push_back(int(parts[2]));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return g;
}

std::string vec_sig(const Vec& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += fmt17(v[i]);
  }
  return s;
}

// Plain key = value report.
class Report {
 public:
  void line(const std::string& key, const std::string& value) {
    out_ += key + " = " + value + "\n";
  }
  void num(const std::string& key, double v) { line(key, fmt17(v)); }
  void count(const std::string& key, long v) { line(key, std::to_string(v)); }
  const std::string& text() const { return out_; }

 private:
  std::string out_;
};

struct Ctx {
  std::string config_path;
  std::string out = "run";
  double step = 1e-3;
  double band = 1e-9;
  double tol = 1e-6;
  std::uint64_t seed = 42;

  std::string command;
  std::string args_sig;
  std::string config_text;
  ptrac::LoadedConfig cfg;

  void load(const std::string& cmd) {
    command = cmd;
    std::ifstream f(config_path, std::ios::binary);
    if (!f)
      throw ValidationError("cannot open config file: " + config_path);
    config_text.assign(std::istreambuf_iterator<char>(f),
                       std::istreambuf_iterator<char>());
    cfg = ptrac::load_geometry(config_text);
  }

  const ChartGeometry& geom() const { return cfg.geom; }

  Vec point_arg(const std::string& text, const char* flag) const {
    Vec x = parse_point(text, flag);
    if (int(x.size()) != cfg.geom.dim())
      throw ValidationError(std::string(flag) + ": expected " +
                            std::to_string(cfg.geom.dim()) + " coordinates");
    if (!cfg.geom.domain().contains(x))
      throw ValidationError(std::string(flag) +
                            ": point lies outside the chart domain");
    return x;
  }

  // First prolong block of the requested operator, realized as a field.
  const ptrac::TractorSpec& prolong_block(const std::string& source,
                                          std::size_t skip = 0) const {
    for (const ptrac::TractorSpec& t : cfg.tractors)
      if (t.source == source && skip-- == 0) return t;
    throw ValidationError("config has no " + source + " tractor block");
  }

  void finish(Report& rep, const CsvWriter* csv) const {
    ptrac::RunManifest m;
    m.command = command;
    m.config_hash =
        ptrac::fnv1a(config_text + "\n--\n" + command + "\n" + args_sig);
    m.step = step;
    m.band = band;
    m.tol = tol;
    m.seed = seed;
    if (csv) {
      csv->save(out + ".csv");
      m.outputs.push_back(out + ".csv");
    }
    CsvWriter::write_file(out + ".report.txt", rep.text());
    m.outputs.push_back(out + ".report.txt");
    m.save(out + ".manifest.json");
  }
};

std::vector<std::string> coord_names(int n) {
  std::vector<std::string> h;
  for (int i = 1; i <= n; ++i) h.push_back("x" + std::to_string(i));
  return h;
}

double sup_abs(const std::vector<double>& v) {
  double s = 0;
  for (double a : v) s = std::max(s, std::fabs(a));
  return s;
}

// curvature: R, Ric, P, and the P gradient as one wide row per probe point.
void run_curvature(Ctx& ctx, const std::vector<std::string>& at) {
  ctx.load("curvature");
  const int n = ctx.geom().dim();
  std::vector<Vec> pts;
  for (const std::string& a : at) pts.push_back(ctx.point_arg(a, "--at"));
  for (const Vec& p : pts) ctx.args_sig += vec_sig(p) + ";";

  std::vector<std::string> header = coord_names(n);
  auto name = [&](const char* base, std::initializer_list<int> idx) {
    std::string s = base;
    for (int i : idx) s += "_" + std::to_string(i + 1);
    header.push_back(s);
  };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) name("R", {a, b, c, d});
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) name("Ric", {a, b});
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) name("P", {a, b});
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) name("dP", {a, b, c});

  CsvWriter csv(header);
  double sR = 0, sRic = 0, sP = 0, sdP = 0;
  for (const Vec& p : pts) {
    const ptrac::CurvatureData cd = ptrac::curvature(ctx.geom(), p);
    Vec row = p;
    row.insert(row.end(), cd.riemann.begin(), cd.riemann.end());
    row.insert(row.end(), cd.ricci.begin(), cd.ricci.end());
    row.insert(row.end(), cd.schouten.begin(), cd.schouten.end());
    row.insert(row.end(), cd.schouten_d.begin(), cd.schouten_d.end());
    csv.row(row);
    sR = std::max(sR, sup_abs(cd.riemann));
    sRic = std::max(sRic, sup_abs(cd.ricci));
    sP = std::max(sP, sup_abs(cd.schouten));
    sdP = std::max(sdP, sup_abs(cd.schouten_d));
  }
  Report rep;
  rep.count("points", long(pts.size()));
  rep.num("sup_riemann", sR);
  rep.num("sup_ricci", sRic);
  rep.num("sup_schouten", sP);
  rep.num("sup_schouten_gradient", sdP);
  ctx.finish(rep, &csv);
}

void run_geodesic(Ctx& ctx, const std::string& at, const std::string& dir,
                  double length) {
  ctx.load("geodesic");
  const int n = ctx.geom().dim();
  const Vec x0 = ctx.point_arg(at, "--at");
  const Vec v0 = parse_point(dir, "--dir");
  if (int(v0.size()) != n)
    throw ValidationError("--dir: expected " + std::to_string(n) +
                          " components");
  ctx.args_sig = vec_sig(x0) + ";" + vec_sig(v0) + ";" + fmt17(length);

  const ptrac::SampledCurve cu =
      ptrac::geodesic(ctx.geom(), x0, v0, length, ctx.step);
  std::vector<std::string> header = {"t"};
  for (const std::string& c : coord_names(n)) header.push_back(c);
  for (int i = 1; i <= n; ++i) header.push_back("v" + std::to_string(i));
  CsvWriter csv(header);
  for (std::size_t i = 0; i < cu.size(); ++i) {
    Vec row = {cu.t[i]};
    row.insert(row.end(), cu.x[i].begin(), cu.x[i].end());
    row.insert(row.end(), cu.v[i].begin(), cu.v[i].end());
    csv.row(row);
  }
  Report rep;
  rep.count("samples", long(cu.size()));
  rep.line("complete", cu.complete ? "true" : "false");
  rep.line("end", vec_sig(cu.x.back()));
  ctx.finish(rep, &csv);
}

// transport: carry the first prolonged tractor along a straight segment and
// report how far the result drifts from the field at the far end.
void run_transport(Ctx& ctx, const std::string& at, const std::string& to) {
  ctx.load("transport");
  const Vec a = ctx.point_arg(at, "--at");
  const Vec b = ctx.point_arg(to, "--to");
  ctx.args_sig = vec_sig(a) + ";" + vec_sig(b);

  const ptrac::TractorSpec* spec = nullptr;
  for (const ptrac::TractorSpec& t : ctx.cfg.tractors)
    if (t.source == "prolong-k1" || t.source == "prolong-k2") {
      spec = &t;
      break;
    }
  if (!spec)
    throw ValidationError("transport needs a prolong tractor block");
  const TractorField V = ptrac::make_tractor_field(ctx.geom(), *spec);
  const ptrac::TractorValue v0 = V(a);
  const ptrac::CurveFn seg = ptrac::segment_curve(a, b);

  std::vector<std::string> header = {"t"};
  for (std::size_t i = 0; i < v0.comp.size(); ++i)
    header.push_back("comp" + std::to_string(i));
  CsvWriter csv(header);
  ptrac::TractorValue vt = v0;
  for (int j = 0; j <= 10; ++j) {
    const double t = j / 10.0;
    if (j > 0)
      vt = ptrac::tractor_transport(ctx.geom(), seg, 0.0, t, v0, ctx.step);
    Vec row = {t};
    row.insert(row.end(), vt.comp.begin(), vt.comp.end());
    csv.row(row);
  }
  const ptrac::TractorValue vb = V(b);
  double defect = 0;
  for (std::size_t i = 0; i < vb.comp.size(); ++i)
    defect = std::max(defect, std::fabs(vt.comp[i] - vb.comp[i]));
  Report rep;
  rep.count("components", long(v0.comp.size()));
  rep.num("parallel_defect", defect);
  ctx.finish(rep, &csv);
}

void run_cone_geodesic(Ctx& ctx, const std::string& at, const std::string& dir,
                       double length) {
  ctx.load("cone-geodesic");
  const int n = ctx.geom().dim();
  const Vec y0 = parse_point(at, "--at");
  const Vec w0 = parse_point(dir, "--dir");
  if (int(y0.size()) != n + 1 || int(w0.size()) != n + 1)
    throw ValidationError("cone points take " + std::to_string(n + 1) +
                          " coordinates (chart plus scale)");
  ctx.args_sig = vec_sig(y0) + ";" + vec_sig(w0) + ";" + fmt17(length);

  ptrac::ConeGeometry cone(ctx.geom());
  const ptrac::SampledCurve cu =
      ptrac::cone_geodesic(cone, y0, w0, length, ctx.step);
  std::vector<std::string> header = {"t"};
  for (const std::string& c : coord_names(n)) header.push_back(c);
  header.push_back("rho");
  for (int i = 1; i <= n + 1; ++i) header.push_back("w" + std::to_string(i));
  CsvWriter csv(header);
  for (std::size_t i = 0; i < cu.size(); ++i) {
    Vec row = {cu.t[i]};
    row.insert(row.end(), cu.x[i].begin(), cu.x[i].end());
    row.insert(row.end(), cu.v[i].begin(), cu.v[i].end());
    csv.row(row);
  }
  Report rep;
  rep.count("samples", long(cu.size()));
  rep.line("complete", cu.complete ? "true" : "false");
  ctx.finish(rep, &csv);
}

void run_hom_coords(Ctx& ctx, const std::vector<std::string>& at,
                    const std::string& anchor_text) {
  ctx.load("hom-coords");
  const int n = ctx.geom().dim();
  Vec anchor;
  if (!anchor_text.empty()) {
    anchor = ctx.point_arg(anchor_text, "--anchor");
  } else {
    const ptrac::Domain& d = ctx.geom().domain();
    anchor.resize(n);
    for (int i = 0; i < n; ++i) anchor[i] = 0.5 * (d.lo[i] + d.hi[i]);
  }
  std::vector<Vec> pts;
  for (const std::string& a : at) {
    Vec x = parse_point(a, "--at");
    if (int(x.size()) != n)
      throw ValidationError("--at: expected " + std::to_string(n) +
                            " coordinates");
    pts.push_back(std::move(x));
  }
  ctx.args_sig = vec_sig(anchor) + "|";
  for (const Vec& p : pts) ctx.args_sig += vec_sig(p) + ";";

  ptrac::NormalFrame nf(ctx.geom(), anchor);
  std::vector<std::string> header = coord_names(n);
  for (int i = 0; i <= n; ++i) header.push_back("X" + std::to_string(i));
  header.push_back("scale");
  CsvWriter csv(header);
  for (const Vec& p : pts) {
    const Vec X = nf.hom_coords(p);
    Vec row = p;
    row.insert(row.end(), X.begin(), X.end());
    row.push_back(nf.scale(p));
    csv.row(row);
  }
  Report rep;
  rep.line("anchor", vec_sig(anchor));
  rep.num("validity_radius", nf.validity_radius());
  rep.count("points", long(pts.size()));
  ctx.finish(rep, &csv);
}

// bgg check: sup of the operator residual at seeded probe points; a sup
// over --tol is a numerical failure after the outputs are written.
void run_bgg_check(Ctx& ctx, const std::string& op, const std::string& sigma,
                   const std::string& kform, int samples) {
  ctx.load("bgg check");
  const int n = ctx.geom().dim();
  if (samples < 1) throw ValidationError("--samples must be positive");
  ctx.args_sig = op + "|" + sigma + "|" + kform + "|" + std::to_string(samples);

  ptrac::DensitySolution s;
  ptrac::WeightedOneForm k;
  if (op == "k1" || op == "k2") {
    if (sigma.empty()) throw ValidationError("--sigma required for " + op);
    s.w = op == "k1" ? 1.0 : 2.0;
    s.f = ptrac::parse_field(sigma, n);
  } else if (op == "skew") {
    if (kform.empty())
      throw ValidationError("--k required for the skew operator");
    std::size_t pos = 0;
    while (pos <= kform.size()) {
      const std::size_t next = kform.find(';', pos);
      k.k.push_back(ptrac::parse_field(
          kform.substr(pos, next == std::string::npos ? next : next - pos),
          n));
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    if (int(k.k.size()) != n)
      throw ValidationError("--k needs " + std::to_string(n) +
                            " semicolon-separated components");
  } else {
    throw ValidationError("--op must be k1, k2, or skew");
  }

  ptrac::Rng rng(ctx.seed);
  CsvWriter csv([&] {
    std::vector<std::string> h = coord_names(n);
    h.push_back("residual");
    return h;
  }());
  double worst = 0;
  for (int i = 0; i < samples; ++i) {
    const Vec x = ctx.geom().domain().sample(rng, 0.8);
    double r = 0;
    if (op == "k1")
      r = sup_abs(ptrac::bgg_residual_k1(ctx.geom(), s, x));
    else if (op == "k2")
      r = sup_abs(ptrac::bgg_residual_k2(ctx.geom(), s, x));
    else
      r = sup_abs(ptrac::bgg_residual_skew(ctx.geom(), k, x));
    worst = std::max(worst, r);
    Vec row = x;
    row.push_back(r);
    csv.row(row);
  }
  Report rep;
  rep.line("op", op);
  rep.count("samples", samples);
  rep.num("max_residual", worst);
  rep.num("tol", ctx.tol);
  rep.line("pass", worst <= ctx.tol ? "true" : "false");
  ctx.finish(rep, &csv);
  if (worst > ctx.tol)
    throw ptrac::NumericalError("bgg residual " + fmt17(worst) +
                                " exceeds tolerance " + fmt17(ctx.tol));
}

void run_prolong(Ctx& ctx, const std::string& op, const std::string& sigma,
                 const std::vector<std::string>& at) {
  ctx.load("prolong");
  const int n = ctx.geom().dim();
  if (op != "k1" && op != "k2")
    throw ValidationError("--op must be k1 or k2");
  if (sigma.empty()) throw ValidationError("--sigma required");
  ctx.args_sig = op + "|" + sigma + "|";

  ptrac::DensitySolution s{op == "k1" ? 1.0 : 2.0,
                           ptrac::parse_field(sigma, n)};
  const TractorField V = op == "k1" ? ptrac::prolong_k1(ctx.geom(), s)
                                    : ptrac::prolong_k2(ctx.geom(), s);

  std::vector<Vec> pts;
  for (const std::string& a : at) pts.push_back(ctx.point_arg(a, "--at"));
  ptrac::Rng rng(ctx.seed);
  if (pts.empty())
    for (int i = 0; i < 5; ++i)
      pts.push_back(ctx.geom().domain().sample(rng, 0.8));
  for (const Vec& p : pts) ctx.args_sig += vec_sig(p) + ";";

  const std::size_t m = V(pts[0]).comp.size();
  std::vector<std::string> header = coord_names(n);
  for (std::size_t i = 0; i < m; ++i)
    header.push_back("comp" + std::to_string(i));
  CsvWriter csv(header);
  for (const Vec& p : pts) {
    Vec row = p;
    const ptrac::TractorValue v = V(p);
    row.insert(row.end(), v.comp.begin(), v.comp.end());
    csv.row(row);
  }

  std::vector<ptrac::CurveFn> curves;
  for (int i = 0; i < 3; ++i)
    curves.push_back(ptrac::segment_curve(ctx.geom().domain().sample(rng, 0.7),
                                          ctx.geom().domain().sample(rng, 0.7)));
  ptrac::NormalityOptions nopt;
  nopt.fd_step = ctx.step;
  Report rep;
  rep.line("op", op);
  rep.count("points", long(pts.size()));
  rep.num("parallel_defect",
          ptrac::normality_check(ctx.geom(), V, curves, nopt));
  ctx.finish(rep, &csv);
}

// model: classify the constants blocks of the config and label rays.
void run_model(Ctx& ctx, const std::string& family,
               const std::vector<std::string>& rays) {
  ctx.load("model");
  const int N = ctx.geom().dim() + 1;
  ctx.args_sig = family + "|";

  std::vector<const ptrac::TractorSpec*> consts;
  for (const ptrac::TractorSpec& t : ctx.cfg.tractors)
    if (t.source == "constants") consts.push_back(&t);

  ModelTensor I = [&] {
    if (family == "pair") {
      std::vector<Vec> cov;
      for (const ptrac::TractorSpec* t : consts)
        if (t->family == TensorFamily::Covector) cov.push_back(t->components);
      if (cov.size() != 2)
        throw ValidationError(
            "family pair needs exactly two covector constants blocks");
      return ModelTensor::pair(cov[0], cov[1]);
    }
    if (consts.size() != 1)
      throw ValidationError("model needs exactly one constants block");
    return ptrac::make_model_tensor(*consts[0], N);
  }();

  const ptrac::GType gt = ptrac::g_type(I, ctx.band);
  Report rep;
  rep.line("family", family.empty() ? "(from config)" : family);
  rep.line("zero", gt.zero ? "true" : "false");
  rep.count("pos", gt.pos);
  rep.count("neg", gt.neg);
  rep.count("kernel", gt.kernel);
  rep.count("rank", gt.rank);
  rep.count("span", gt.span);

  std::vector<std::string> header;
  for (int i = 0; i < N; ++i) header.push_back("X" + std::to_string(i));
  header.push_back("label");
  header.push_back("smooth");
  CsvWriter csv(header);
  for (const std::string& r : rays) {
    const Vec X = parse_point(r, "--ray");
    if (int(X.size()) != N)
      throw ValidationError("--ray: expected " + std::to_string(N) +
                            " components");
    ctx.args_sig += vec_sig(X) + ";";
    std::vector<std::string> row;
    for (double v : X) row.push_back(fmt17(v));
    row.push_back(ptrac::p_type(I, X, ctx.band).text);
    std::string smooth;
    try {
      smooth = ptrac::zero_locus_smooth(I, X, ctx.band) ? "1" : "0";
    } catch (const ValidationError&) {
      // ray is off the zero locus; leave the cell empty
    }
    row.push_back(smooth);
    csv.row(row);
  }
  rep.count("rays", long(rays.size()));
  ctx.finish(rep, &csv);
}

void run_stratify(Ctx& ctx, const std::string& family,
                  const std::string& grid_text) {
  ctx.load("stratify");
  const ptrac::GridSpec grid = parse_grid(grid_text);
  ctx.args_sig = family + "|" + grid_text;

  TensorFamily fam;
  std::vector<TractorField> fields;
  if (family == "covector") {
    fam = TensorFamily::Covector;
    fields.push_back(
        ptrac::make_tractor_field(ctx.geom(), ctx.prolong_block("prolong-k1")));
  } else if (family == "sym2") {
    fam = TensorFamily::Sym2;
    fields.push_back(
        ptrac::make_tractor_field(ctx.geom(), ctx.prolong_block("prolong-k2")));
  } else if (family == "pair") {
    fam = TensorFamily::PairCovectors;
    fields.push_back(
        ptrac::make_tractor_field(ctx.geom(), ctx.prolong_block("prolong-k1")));
    fields.push_back(ptrac::make_tractor_field(
        ctx.geom(), ctx.prolong_block("prolong-k1", 1)));
  } else {
    throw ValidationError("--family must be covector, sym2, or pair");
  }

  ptrac::StratOptions opt;
  opt.band = ctx.band;
  opt.grad_tol = ctx.tol;
  opt.fd_step = ctx.step;
  opt.normality_tol = ctx.tol;
  opt.seed = ctx.seed;
  const ptrac::StratReport srep =
      ptrac::stratify(ctx.geom(), fields, fam, grid, opt);

  const int n = ctx.geom().dim();
  std::vector<std::string> header = coord_names(n);
  header.push_back("label");
  CsvWriter csv(header);
  for (std::size_t i = 0; i < srep.labels.size(); ++i) {
    const Vec x = srep.grid.point(i);
    std::vector<std::string> row;
    for (double v : x) row.push_back(fmt17(v));
    row.push_back(srep.labels[i].text);
    csv.row(row);
  }

  Report rep;
  rep.count("strata", srep.strata());
  for (const auto& [text, c] : srep.counts)
    rep.count("count[" + text + "]", c);
  rep.count("zero_points", long(srep.zero_points.size()));
  long singular = 0;
  std::map<std::string, int> sig_tally;
  for (const ptrac::ZeroLocusPoint& z : srep.zero_points) {
    if (!z.smooth) ++singular;
    if (z.has_boundary_form)
      ++sig_tally["(" + std::to_string(z.boundary_signature.pos) + "," +
                  std::to_string(z.boundary_signature.neg) + "," +
                  std::to_string(z.boundary_signature.zero) + ")"];
  }
  rep.count("singular_points", singular);
  for (const auto& [sig, c] : sig_tally)
    rep.count("boundary_signature" + sig, c);
  ctx.finish(rep, &csv);
}

void run_einstein(Ctx& ctx, const std::string& sigma, double w, int samples,
                  const std::vector<std::string>& at) {
  ctx.load("einstein-check");
  const int n = ctx.geom().dim();
  if (sigma.empty()) throw ValidationError("--sigma required");
  ctx.args_sig = sigma + "|" + fmt17(w) + "|" + std::to_string(samples) + "|";

  std::vector<Vec> pts;
  for (const std::string& a : at) pts.push_back(ctx.point_arg(a, "--at"));
  ptrac::Rng rng(ctx.seed);
  if (pts.empty())
    for (int i = 0; i < samples; ++i)
      pts.push_back(ctx.geom().domain().sample(rng, 0.7));
  for (const Vec& p : pts) ctx.args_sig += vec_sig(p) + ";";

  const ptrac::DensitySolution s{w, ptrac::parse_field(sigma, n)};
  const ptrac::ScaleReport srep =
      ptrac::scale_geometry_check(ctx.geom(), s, pts);

  std::vector<std::string> header = coord_names(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      header.push_back("phat_" + std::to_string(a + 1) + "_" +
                       std::to_string(b + 1));
  if (srep.metric_defined)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        header.push_back("g_" + std::to_string(a + 1) + "_" +
                         std::to_string(b + 1));
  CsvWriter csv(header);
  for (const ptrac::ScalePointData& pd : srep.points) {
    Vec row = pd.x;
    row.insert(row.end(), pd.phat.begin(), pd.phat.end());
    if (srep.metric_defined) row.insert(row.end(), pd.g.begin(), pd.g.end());
    csv.row(row);
  }

  Report rep;
  rep.count("points", long(pts.size()));
  rep.num("phat_sup", srep.phat_sup);
  rep.num("phat_grad_sup", srep.phat_grad_sup);
  rep.line("metric_defined", srep.metric_defined ? "true" : "false");
  if (srep.metric_defined) {
    rep.num("c", srep.c);
    rep.num("c_spread", srep.c_spread);
    rep.num("c_residual", srep.c_residual);
    rep.line("signature", "(" + std::to_string(srep.g_signature.pos) + "," +
                              std::to_string(srep.g_signature.neg) + "," +
                              std::to_string(srep.g_signature.zero) + ")");
  }
  ctx.finish(rep, &csv);
}

void run_complete(Ctx& ctx, const std::string& sigma, double w,
                  const std::string& at, const std::string& dir,
                  double length) {
  ctx.load("complete");
  const int n = ctx.geom().dim();
  if (sigma.empty()) throw ValidationError("--sigma required");
  const Vec x0 = ctx.point_arg(at, "--at");
  const Vec v0 = parse_point(dir, "--dir");
  if (int(v0.size()) != n)
    throw ValidationError("--dir: expected " + std::to_string(n) +
                          " components");
  ctx.args_sig = sigma + "|" + fmt17(w) + "|" + vec_sig(x0) + ";" +
                 vec_sig(v0) + ";" + fmt17(length);

  const ptrac::DensitySolution s{w, ptrac::parse_field(sigma, n)};
  ptrac::ProfileOptions opt;
  opt.step = ctx.step;
  opt.band = ctx.band;
  const ptrac::CompletenessProfile prof =
      ptrac::completeness_profile(ctx.geom(), s, x0, v0, length, opt);

  CsvWriter csv(std::vector<std::string>{"s", "t", "sigma"});
  for (const ptrac::ProfileSample& smp : prof.samples)
    csv.row(Vec{smp.s, smp.t, smp.sigma});
  Report rep;
  rep.count("samples", long(prof.samples.size()));
  rep.line("hit_band", prof.hit_band ? "true" : "false");
  rep.line("left_domain", prof.left_domain ? "true" : "false");
  rep.num("s_end", prof.samples.back().s);
  rep.num("t_end", prof.samples.back().t);
  ctx.finish(rep, &csv);
}

void add_common(CLI::App* sub, Ctx& ctx) {
  sub->add_option("--config", ctx.config_path, "geometry config file (json)")
      ->required();
  sub->add_option("--out", ctx.out, "output file prefix");
  sub->add_option("--step", ctx.step, "integration / stencil step");
  sub->add_option("--band", ctx.band, "zero-detection band");
  sub->add_option("--tol", ctx.tol, "certificate tolerance");
  sub->add_option("--seed", ctx.seed, "probe-point seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"projective-geometry runs over chart configs"};
  app.require_subcommand(1);
  Ctx ctx;

  auto at_list = std::make_shared<std::vector<std::string>>();
  auto at_one = std::make_shared<std::string>();
  auto dir = std::make_shared<std::string>();
  auto to = std::make_shared<std::string>();
  auto anchor = std::make_shared<std::string>();
  auto length = std::make_shared<double>(1.0);
  auto op = std::make_shared<std::string>();
  auto sigma = std::make_shared<std::string>();
  auto kform = std::make_shared<std::string>();
  auto samples = std::make_shared<int>(50);
  auto family = std::make_shared<std::string>();
  auto rays = std::make_shared<std::vector<std::string>>();
  auto grid = std::make_shared<std::string>();
  auto weight = std::make_shared<double>(2.0);

  CLI::App* c = app.add_subcommand("curvature", "curvature at probe points");
  add_common(c, ctx);
  c->add_option("--at", *at_list, "point x1,..,xn (repeatable)")->required();
  c->callback([&] { run_curvature(ctx, *at_list); });

  CLI::App* ge = app.add_subcommand("geodesic", "affine geodesic from a point");
  add_common(ge, ctx);
  ge->add_option("--at", *at_one, "start point")->required();
  ge->add_option("--dir", *dir, "initial velocity")->required();
  ge->add_option("--length", *length, "parameter length");
  ge->callback([&] { run_geodesic(ctx, *at_one, *dir, *length); });

  CLI::App* tr =
      app.add_subcommand("transport", "parallel transport along a segment");
  add_common(tr, ctx);
  tr->add_option("--at", *at_one, "start point")->required();
  tr->add_option("--to", *to, "end point")->required();
  tr->callback([&] { run_transport(ctx, *at_one, *to); });

  CLI::App* cg =
      app.add_subcommand("cone-geodesic", "geodesic of the cone connection");
  add_common(cg, ctx);
  cg->add_option("--at", *at_one, "start (chart coords, scale)")->required();
  cg->add_option("--dir", *dir, "initial velocity (n+1 components)")
      ->required();
  cg->add_option("--length", *length, "parameter length");
  cg->callback([&] { run_cone_geodesic(ctx, *at_one, *dir, *length); });

  CLI::App* hc = app.add_subcommand(
      "hom-coords", "generalised homogeneous coordinates of chart points");
  add_common(hc, ctx);
  hc->add_option("--at", *at_list, "point (repeatable)")->required();
  hc->add_option("--anchor", *anchor, "frame anchor (default: domain center)");
  hc->callback([&] { run_hom_coords(ctx, *at_list, *anchor); });

  CLI::App* bg = app.add_subcommand("bgg", "first BGG operators");
  bg->require_subcommand(1);
  CLI::App* bc = bg->add_subcommand("check", "residual sup at seeded points");
  add_common(bc, ctx);
  bc->add_option("--op", *op, "k1, k2, or skew")->required();
  bc->add_option("--sigma", *sigma, "density expression (k1, k2)");
  bc->add_option("--k", *kform, "one-form components e1;..;en (skew)");
  bc->add_option("--samples", *samples, "probe points");
  bc->callback([&] { run_bgg_check(ctx, *op, *sigma, *kform, *samples); });

  CLI::App* pr =
      app.add_subcommand("prolong", "prolonged tractor of a BGG solution");
  add_common(pr, ctx);
  pr->add_option("--op", *op, "k1 or k2")->required();
  pr->add_option("--sigma", *sigma, "density expression")->required();
  pr->add_option("--at", *at_list, "probe point (repeatable)");
  pr->callback([&] { run_prolong(ctx, *op, *sigma, *at_list); });

  CLI::App* mo =
      app.add_subcommand("model", "classify constant model tensors");
  add_common(mo, ctx);
  mo->add_option("--family", *family,
                 "covector, sym2, skew2, symk, or pair (default: from config)");
  mo->add_option("--ray", *rays, "model ray X0,..,Xn (repeatable)");
  mo->callback([&] { run_model(ctx, *family, *rays); });

  CLI::App* st =
      app.add_subcommand("stratify", "label a grid by saturated sign data");
  add_common(st, ctx);
  st->add_option("--family", *family, "covector, sym2, or pair")->required();
  st->add_option("--grid", *grid, "axes lo:hi:count;..")->required();
  st->callback([&] { run_stratify(ctx, *family, *grid); });

  CLI::App* ei = app.add_subcommand(
      "einstein-check", "rescaled Schouten constancy for a density scale");
  add_common(ei, ctx);
  ei->add_option("--sigma", *sigma, "scale expression")->required();
  ei->add_option("--w", *weight, "density weight");
  ei->add_option("--samples", *samples, "probe points when --at absent");
  ei->add_option("--at", *at_list, "probe point (repeatable)");
  ei->callback(
      [&] { run_einstein(ctx, *sigma, *weight, *samples, *at_list); });

  CLI::App* co = app.add_subcommand(
      "complete", "affine-parameter profile toward a scale zero");
  add_common(co, ctx);
  co->add_option("--sigma", *sigma, "scale expression")->required();
  co->add_option("--w", *weight, "density weight");
  co->add_option("--at", *at_one, "start point")->required();
  co->add_option("--dir", *dir, "ray direction")->required();
  co->add_option("--length", *length, "parameter length");
  co->callback([&] {
    run_complete(ctx, *sigma, *weight, *at_one, *dir, *length);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ptrac::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const ptrac::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  }
  return 0;
}

#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "clusterlab/bose_hubbard.hpp"
#include "clusterlab/correlations.hpp"
#include "clusterlab/csv.hpp"
#include "clusterlab/eigensolver.hpp"
#include "clusterlab/errors.hpp"
#include "clusterlab/free_fermion.hpp"
#include "clusterlab/localizable.hpp"
#include "json.hpp"

namespace clusterlab::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

double round12(double v) { return std::stod(fmt12(v)); }

// Runs body(i) for i in [0, count) on up to `threads` workers.
template <class Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string flag(bool b) { return b ? "1" : "0"; }

std::string xi_cell(const std::optional<LengthEstimate>& e) {
  if (!e) return "nan";
  return e->infinite ? "inf" : fmt12(e->xi);
}

// Sink for one subcommand: stdout, or a run directory with config and manifest.
class Output {
 public:
  Output(std::ostream& out, std::string dir, json config, std::chrono::steady_clock::time_point start)
      : out_(out), dir_(std::move(dir)), config_(std::move(config)), start_(start) {
    if (!dir_.empty()) {
      fs::create_directories(dir_);
      write("config.json", config_.dump(2) + "\n");
    }
  }

  void write(const std::string& name, const std::string& content) {
    if (dir_.empty()) {
      out_ << content;
      return;
    }
    std::ofstream f(fs::path(dir_) / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (fs::path(dir_) / name).string());
    f << content;
    files_.push_back(name);
  }

  void finish() {
    if (dir_.empty()) return;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json manifest{{"version", kVersion},
                  {"subcommand", config_.value("subcommand", "")},
                  {"seed", config_.value("seed", json(nullptr))},
                  {"files", files_},
                  {"timings", {{"wall_seconds", secs}}}};
    std::ofstream f(fs::path(dir_) / "manifest.json", std::ios::binary);
    f << manifest.dump(2) << "\n";
  }

 private:
  std::ostream& out_;
  std::string dir_;
  json config_;
  std::vector<std::string> files_;
  std::chrono::steady_clock::time_point start_;
};

struct BhArgs {
  double j = 0.1;
  std::optional<double> jb;
  double u = 1.0;
  std::optional<double> ubb;
  std::optional<double> uab;
  bool no_field = false;

  BoseHubbardParams params() const {
    BoseHubbardParams p{j, jb.value_or(j), u, ubb.value_or(u), uab.value_or(u)};
    p.validate();
    return p;
  }
};

void add_bh_options(CLI::App* cmd, BhArgs& a) {
  cmd->add_option("--j", a.j, "tunneling of species a");
  cmd->add_option("--jb", a.jb, "tunneling of species b (default: --j)");
  cmd->add_option("--u", a.u, "on-site repulsion U_aa");
  cmd->add_option("--ubb", a.ubb, "on-site repulsion U_bb (default: --u)");
  cmd->add_option("--uab", a.uab, "inter-species repulsion (default: --u)");
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw DomainError("bad grid component '" + item + "' in '" + text + "'");
    }
  }
  if (parts.size() == 1) return {parts[0]};
  if (parts.size() != 3) throw DomainError("grid must be start:stop:step, got '" + text + "'");
  const double start = parts[0], stop = parts[1], step = parts[2];
  if (!(step > 0) || stop < start) throw DomainError("grid needs step > 0 and stop >= start");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (count > 100000) throw DomainError("grid has too many points");
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(round12(start + static_cast<double>(i) * step));
  return out;
}

std::vector<Figure2Point> figure2(const Figure2Config& cfg, std::ostream* log) {
  if (cfg.b_grid.empty()) throw DomainError("empty B grid");
  if (cfg.n < 6 || cfg.n > 16) throw DomainError("figure2 needs 6 <= n <= 16");
  if (cfg.l_max < 8) throw DomainError("figure2 needs l_max >= 8");
  std::vector<Figure2Point> pts(cfg.b_grid.size());
  std::mutex log_mutex;

  parallel_for(pts.size(), cfg.threads, [&](std::size_t i) {
    Figure2Point& pt = pts[i];
    pt.b = cfg.b_grid[i];
    try {
      CorrelationSeries czz;
      czz.kind = SeriesKind::zz_analytic;
      for (int L = 4; L <= cfg.l_max; ++L) {
        czz.L.push_back(L);
        czz.values.push_back(czz_analytic(pt.b, L));
      }
      FitOptions corr_fit;
      corr_fit.min_points = 3;
      const bool vanishing = std::all_of(czz.values.begin(), czz.values.end(), [&](double v) {
        return std::abs(v) <= corr_fit.noise_floor;
      });
      if (vanishing) {
        // Identically vanishing correlator: zero length.
        LengthEstimate zero;
        zero.xi = 0.0;
        pt.correlation = zero;
      } else {
        pt.correlation = correlation_length(czz, corr_fit);
      }

      const GroundState gs = ground_state(cluster_hamiltonian(cfg.n, pt.b));
      AnnealConfig ac;
      ac.steps = cfg.anneal_steps;
      ac.proposals = cfg.anneal_proposals;
      CorrelationSeries eloc;
      eloc.kind = SeriesKind::entanglement;
      for (int d = 1; d <= cfg.n / 2; ++d) {
        ac.seed = cfg.seed * 1000003u + static_cast<std::uint64_t>(d);
        const LocEntResult r = optimize_plan(gs.state, 0, d, ac);
        pt.distances.push_back(d);
        pt.e_loc.push_back(r.value);
        // The antipodal pair is joined by two equal arcs; keep it out of the fit.
        if (2 * d == cfg.n) continue;
        eloc.L.push_back(d + 1);
        eloc.values.push_back(r.value);
      }
      FitOptions fo;
      fo.min_points = 4;
      fo.window_min = 2;
      fo.alternating = true;
      fo.resolution_limit = cfg.n;
      pt.entanglement = entanglement_length(eloc, fo);
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
    if (log) {
      std::lock_guard lock(log_mutex);
      *log << "B=" << fmt12(pt.b) << (pt.error.empty() ? " done" : " failed: " + pt.error) << "\n";
    }
  });
  return pts;
}

void write_correlation_csv(std::ostream& out, const std::vector<Figure2Point>& pts) {
  out << "B,xi,model,diverges\n";
  for (const auto& p : pts) {
    const auto& c = p.correlation;
    write_csv_row(out, {fmt12(p.b), xi_cell(c), c ? to_string(c->model) : "error",
                        c ? flag(c->infinite) : "nan"});
  }
}

void write_entanglement_csv(std::ostream& out, const std::vector<Figure2Point>& pts) {
  out << "B,xi_E,model,diverges\n";
  for (const auto& p : pts) {
    const auto& e = p.entanglement;
    write_csv_row(out, {fmt12(p.b), xi_cell(e), e ? to_string(e->model) : "error",
                        e ? flag(e->infinite) : "nan"});
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<Figure2Point>& pts) {
  out << "B,L,E_loc,xi_flag\n";
  for (const auto& p : pts) {
    const std::string f = p.entanglement ? flag(p.entanglement->infinite) : "nan";
    for (std::size_t k = 0; k < p.e_loc.size(); ++k) {
      write_csv_row(out, {fmt12(p.b), std::to_string(p.distances[k] + 1), fmt12(p.e_loc[k]), f});
    }
  }
}

// ---------------------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cluster-state spin chain toolkit", "clusterlab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string out_dir;
  std::uint64_t seed = 1;
  int threads = 0;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_dir, "write results into this directory");
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--threads", threads, "worker threads (0: all cores)");
  };

  BhArgs bh;
  auto* c_couplings = app.add_subcommand("couplings", "effective three-body couplings");
  add_bh_options(c_couplings, bh);
  common(c_couplings);

  auto* c_validate = app.add_subcommand("validate", "compare effective and full trimer spectra");
  add_bh_options(c_validate, bh);
  c_validate->add_flag("--no-field", bh.no_field, "omit the sigma^z field from the effective model");
  common(c_validate);

  std::string model = "cluster";
  int n = 12;
  double b = 0.0;
  std::string b_grid;
  bool large = false;
  int levels = 0;
  auto* c_spectrum = app.add_subcommand("spectrum", "ground energy and gap");
  c_spectrum->add_option("--model", model, "cluster")->check(CLI::IsMember({"cluster"}));
  c_spectrum->add_option("--n", n, "number of spins");
  c_spectrum->add_option("--b", b, "transverse field");
  c_spectrum->add_option("--levels", levels, "also print the lowest levels (dense solver only)");
  common(c_spectrum);

  int l_max = 12;
  bool with_ed = false;
  auto* c_corr = app.add_subcommand("corr", "connected sigma^z sigma^z correlations");
  c_corr->add_option("--b", b, "transverse field");
  c_corr->add_option("--l-max", l_max, "largest L");
  c_corr->add_option("--n", n, "ring size for the exact channel");
  c_corr->add_flag("--ed", with_ed, "add exact-diagonalization values");
  common(c_corr);

  int p_site = 0, q_site = 1;
  std::string scheme = "optimize";
  bool alternate = false;
  auto* c_locent = app.add_subcommand("locent", "localizable entanglement of one pair");
  c_locent->add_option("--b", b, "transverse field");
  c_locent->add_option("--n", n, "ring size");
  c_locent->add_option("--p", p_site, "first target site");
  c_locent->add_option("--q", q_site, "second target site");
  c_locent->add_option("--scheme", scheme, "cluster | lower-bound | optimize")
      ->check(CLI::IsMember({"cluster", "lower-bound", "optimize"}));
  c_locent->add_flag("--alternate", alternate, "sigma^x on every measured spin in the lower-bound scheme");
  common(c_locent);

  int window = 5;
  std::uint64_t samples = 0;
  double threshold = 1e-8;
  auto* c_survey = app.add_subcommand("survey", "count non-vanishing n-point correlations");
  c_survey->add_option("--b", b, "transverse field");
  c_survey->add_option("--n", n, "ring size");
  c_survey->add_option("--window", window, "window length (> 4)");
  c_survey->add_option("--samples", samples, "sample this many strings instead of all");
  c_survey->add_option("--threshold", threshold, "magnitude threshold");
  common(c_survey);

  Figure2Config f2;
  auto* c_figure2 = app.add_subcommand("figure2", "correlation and entanglement length versus B");
  c_figure2->add_option("--b-grid", b_grid, "start:stop:step")->default_str("0:2:0.1");
  c_figure2->add_option("--n", n, "ring size for the entanglement channel");
  c_figure2->add_flag("--large", large, "use n = 16");
  c_figure2->add_option("--l-max", f2.l_max, "largest L of the correlation series");
  c_figure2->add_option("--anneal-steps", f2.anneal_steps, "temperature steps");
  c_figure2->add_option("--anneal-proposals", f2.anneal_proposals, "proposals per temperature");
  common(c_figure2);

  const auto start = std::chrono::steady_clock::now();
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (c_couplings->parsed()) {
      const auto p = bh.params();
      json j{{"params", p}, {"couplings", effective_couplings(p)}, {"perturbative", p.perturbative()},
             {"ratio", p.perturbative_ratio()}};
      Output o(out, out_dir, {{"subcommand", "couplings"}, {"params", p}}, start);
      o.write("couplings.json", j.dump(2) + "\n");
      o.finish();
      if (!p.perturbative()) err << "warning: J/U above the perturbative limit\n";
      return kExitOk;
    }
    if (c_validate->parsed()) {
      const auto p = bh.params();
      TruncationOptions to;
      to.include_field = !bh.no_field;
      const TruncationReport r = validate_perturbation(p, to);
      Output o(out, out_dir,
               {{"subcommand", "validate"}, {"params", p}, {"include_field", to.include_field}}, start);
      o.write("report.json", json(r).dump(2) + "\n");
      o.finish();
      for (const auto& w : r.warnings) err << "warning: " << w << "\n";
      return r.max_rel_dev <= kValidationTolerance ? kExitOk : kExitValidation;
    }
    if (c_spectrum->parsed()) {
      const auto spec = cluster_hamiltonian(n, b);
      json j{{"model", model}, {"n", n}, {"B", b}};
      if (n <= kDenseMaxSites) {
        const auto lv = dense_spectrum(spec);
        const GapResult g = gap_from_spectrum(lv);
        j["ground"] = g.ground;
        j["gap"] = g.gap;
        j["ground_degenerate"] = g.ground_degenerate;
        j["solver"] = "dense";
        if (levels > 0) {
          j["levels"] = std::vector<double>(lv.begin(), lv.begin() + std::min<std::size_t>(lv.size(), levels));
        }
      } else {
        const GapResult g = spectral_gap(spec);
        j["ground"] = g.ground;
        j["gap"] = g.gap;
        j["ground_degenerate"] = g.ground_degenerate;
        j["solver"] = "lanczos";
      }
      Output o(out, out_dir, {{"subcommand", "spectrum"}, {"model", model}, {"n", n}, {"B", b}}, start);
      o.write("spectrum.json", j.dump(2) + "\n");
      o.finish();
      return kExitOk;
    }
    if (c_corr->parsed()) {
      if (l_max < 2) throw DomainError("--l-max must be at least 2");
      std::optional<GroundState> gs;
      if (with_ed) {
        if (l_max > n) throw DomainError("--l-max exceeds the ring size");
        gs = ground_state(cluster_hamiltonian(n, b));
      }
      CorrelationSeries s;
      std::ostringstream csv;
      csv << (with_ed ? "L,analytic,ed\n" : "L,analytic\n");
      for (int L = 2; L <= l_max; ++L) {
        const double a = czz_analytic(b, L);
        s.L.push_back(L);
        s.values.push_back(a);
        std::vector<std::string> row{std::to_string(L), fmt12(a)};
        if (gs) row.push_back(fmt12(two_point_connected(gs->state, Pauli::Z, Pauli::Z, 0, L - 1)));
        write_csv_row(csv, row);
      }
      json fit;
      try {
        fit = correlation_length(s);
      } catch (const DomainError& e) {
        fit = {{"error", e.what()}};
      }
      Output o(out, out_dir,
               {{"subcommand", "corr"}, {"B", b}, {"l_max", l_max}, {"n", n}, {"ed", with_ed}}, start);
      o.write("czz.csv", csv.str());
      o.write("fit.json", fit.dump(2) + "\n");
      o.finish();
      return kExitOk;
    }
    if (c_locent->parsed()) {
      const GroundState gs = ground_state(cluster_hamiltonian(n, b));
      LocEntResult r;
      if (scheme == "cluster") {
        r = branch_average(gs.state, cluster_scheme_plan(n, p_site, q_site));
      } else if (scheme == "lower-bound") {
        if (p_site != 0) throw DomainError("the lower-bound scheme uses --p 0");
        r = branch_average(gs.state, lower_bound_scheme_plan(n, q_site + 1,
                                                       alternate ? SchemeVariant::alternate
                                                                 : SchemeVariant::primary));
      } else {
        AnnealConfig ac;
        ac.seed = seed;
        r = optimize_plan(gs.state, p_site, q_site, ac);
      }
      json j = r;
      j["B"] = b;
      j["scheme"] = scheme;
      Output o(out, out_dir,
               {{"subcommand", "locent"}, {"B", b}, {"n", n}, {"pair", {p_site, q_site}},
                {"scheme", scheme}, {"seed", seed}}, start);
      o.write("locent.json", j.dump(2) + "\n");
      o.finish();
      return kExitOk;
    }
    if (c_survey->parsed()) {
      const GroundState gs = ground_state(cluster_hamiltonian(n, b));
      SurveyConfig sc;
      sc.window_n = window;
      sc.threshold = threshold;
      sc.seed = seed;
      sc.b_field = b;
      if (samples > 0) {
        sc.mode = SurveyMode::sampled;
        sc.samples = samples;
      }
      const SurveyReport r = survey(gs.state, sc);
      Output o(out, out_dir,
               {{"subcommand", "survey"}, {"B", b}, {"n", n}, {"window", window}, {"seed", seed}}, start);
      o.write("survey.json", json(r).dump(2) + "\n");
      o.finish();
      return kExitOk;
    }
    if (c_figure2->parsed()) {
      f2.b_grid = parse_grid(b_grid.empty() ? "0:2:0.1" : b_grid);
      f2.n = large ? 16 : n;
      f2.seed = seed;
      f2.threads = threads;
      const auto pts = figure2(f2, &err);
      std::ostringstream corr, ent, sweep;
      write_correlation_csv(corr, pts);
      write_entanglement_csv(ent, pts);
      write_sweep_csv(sweep, pts);
      json cfg{{"subcommand", "figure2"}, {"b_grid", f2.b_grid}, {"n", f2.n},
               {"l_max", f2.l_max}, {"seed", seed}, {"anneal_steps", f2.anneal_steps},
               {"anneal_proposals", f2.anneal_proposals}};
      if (out_dir.empty()) {
        out << corr.str() << "\n" << ent.str() << "\n" << sweep.str();
        return kExitOk;
      }
      Output o(out, out_dir, cfg, start);
      o.write("correlation_length.csv", corr.str());
      o.write("entanglement_length.csv", ent.str());
      o.write("locent_sweep.csv", sweep.str());
      o.finish();
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace clusterlab::cli

#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "harp/diagnostics.hpp"
#include "harp/error.hpp"
#include "harp/fitting.hpp"
#include "harp/packing.hpp"
#include "harp/processor_file.hpp"
#include "harp/problems.hpp"
#include "harp/schedule.hpp"
#include "harp/transform.hpp"
#include "run_config.hpp"

namespace harp::cli {

namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::size_t threads = 1;
  bool no_timestamp = false;
};

std::size_t default_threads() {
  if (const char* env = std::getenv("HARP_DEFAULT_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return 1;
}

RunConfig load_config(const Globals& g) {
  RunConfig cfg = g.config_path.empty() ? RunConfig{} : load_run_config(g.config_path);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError(0, "--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) cfg.seed = *g.seed;
  if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
  cfg.validate();
  return cfg;
}

std::string timestamp_line(const std::string& command) {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return "# harp " + command + " " + buf + "\n";
}

class CsvSink {
 public:
  CsvSink(const Globals& g, std::string command) : g_(g), command_(std::move(command)) {}

  void write(std::ostream& os, const std::string& body) const {
    if (!g_.no_timestamp) os << timestamp_line(command_);
    os << body;
  }
  void write_file(const fs::path& path, const std::string& body) const {
    std::ofstream f(path, std::ios::trunc);
    if (!f) fail(Errc::io_error, "cannot write " + path.string());
    write(f, body);
  }

 private:
  const Globals& g_;
  std::string command_;
};

// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the
// lowest-index failure.
template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t w = std::max<std::size_t>(1, std::min(threads, n));
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < w; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<LayerProblem> load_problems(const RunConfig& cfg) {
  std::vector<LayerProblem> out;
  if (cfg.from_files()) {
    LayerProblem p{read_tensor(cfg.w_path), read_tensor(cfg.h_path)};
    p.validate();
    out.push_back(std::move(p));
    return out;
  }
  for (std::size_t i = 0; i < cfg.problems; ++i) out.push_back(gen_problem(cfg.synthetic_for(i)));
  return out;
}

ProcessorPair pair_for(const ProcessorOptions& opts, const LayerProblem& prob, std::size_t i) {
  ProcessorOptions o = opts;
  o.sign_seed = opts.sign_seed.derive(i);
  return make_processor_pair(prob.d_out(), prob.d_in(), o);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::string join_radices(const Schedule& s) {
  std::string r;
  for (std::size_t t = 0; t < s.stages(); ++t) r += (t ? "x" : "") + std::to_string(s.radices[t]);
  return r;
}

std::optional<std::vector<std::size_t>> parse_list(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError(0, "expected a comma-separated list of integers, got '" + text + "'");
    }
  }
  return out;
}

// --- commands --------------------------------------------------------------

struct ScheduleArgs {
  std::size_t dim = 0;
  std::optional<std::size_t> base, max;
  std::string radices;
};

int cmd_schedule(const Globals& g, const ScheduleArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(g);
  const std::size_t d = a.dim ? a.dim : cfg.synthetic.d_in;
  const auto explicit_radices = a.radices.empty() ? cfg.processor.radices : parse_list(a.radices);
  const Schedule s = explicit_radices ? make_schedule(d, *explicit_radices)
                                      : greedy_schedule(d, a.base.value_or(cfg.processor.base_radix),
                                                        a.max.value_or(cfg.processor.max_radix));
  std::ostringstream os;
  os << "stage,radix,stride,blocks,params,multiplies\n";
  for (std::size_t t = 0; t < s.stages(); ++t) {
    os << t << ',' << s.radices[t] << ',' << s.strides[t] << ',' << s.blocks[t] << ','
       << s.blocks[t] * block_param_count(s.radices[t]) << ',' << d * s.radices[t] << '\n';
  }
  os << "total,,,," << param_count(s, cfg.processor.passes) << ',' << multiply_count(s) << '\n';
  CsvSink(g, "schedule").write(out, os.str());
  return kOk;
}

int cmd_mixer(const Globals& g, std::size_t b, std::ostream& out) {
  const RunConfig cfg = load_config(g);
  const BaseMixer m = cfg.processor.mixers == MixerPolicy::identity ? identity_mixer(b) : default_mixer(b);
  std::ostringstream os;
  os << "radix,kind,seed,orthogonality_residual\n"
     << b << ',' << mixer_kind_name(m.kind) << ',' << m.seed << ',' << fmt(orthogonality_residual(m.matrix)) << '\n';
  CsvSink(g, "mixer").write(out, os.str());
  return kOk;
}

struct EquivArgs {
  std::size_t dim = 0;
  std::string radices;
  bool kron = false;
  std::optional<std::size_t> kron_order;
  bool no_signs = false;
};

int cmd_equiv_check(const Globals& g, const EquivArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_config(g);
  ProcessorOptions o = cfg.processor;
  if (!a.radices.empty()) o.radices = parse_list(a.radices);
  if (a.kron) o.kronecker = true;
  if (a.kron_order) o.kron_order = a.kron_order;
  if (a.no_signs) o.random_signs = false;
  const HarpProcessor p = make_processor(a.dim, o);
  const EquivalenceReport r = rht_equivalence_check(p);
  std::ostringstream os;
  os << "dim,mode,kron_order,schedule,max_abs_error,permutation_is_identity,direct_hadamard_match\n"
     << p.dim() << ',' << mode_name(p.mode()) << ',' << p.kron_order() << ',' << join_radices(p.schedule()) << ','
     << fmt(r.max_abs_error) << ',' << r.permutation_is_identity << ',' << r.direct_hadamard_match << '\n';
  CsvSink(g, "equiv-check").write(out, os.str());
  if (!(r.max_abs_error <= 1e-12)) {
    err << "harp: equivalence error " << r.max_abs_error << " exceeds 1e-12\n";
    return kRuntime;
  }
  return kOk;
}

struct GenArgs {
  std::string out_w, out_h;
  std::string dtype = "f64";
  std::size_t index = 0;
};

int cmd_gen(const Globals& g, const GenArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(g);
  DType dt = DType::f64;
  if (a.dtype == "f32") dt = DType::f32;
  else if (a.dtype != "f64") throw ConfigError(0, "--dtype must be f32 or f64");
  const LayerProblem prob = gen_problem(cfg.synthetic_for(a.index));
  write_tensor(a.out_w, prob.w, dt);
  write_tensor(a.out_h, prob.h, dt);
  out << "wrote " << a.out_w << " (" << prob.d_out() << "x" << prob.d_in() << ") and " << a.out_h << '\n';
  return kOk;
}

int cmd_fit(const Globals& g, std::ostream& out) {
  const RunConfig cfg = load_config(g);
  const auto problems = load_problems(cfg);
  fs::create_directories(cfg.out_dir);
  const Quantizer quant(cfg.fit.quantizer);
  const CsvSink sink(g, "fit");

  std::vector<std::string> rows(problems.size());
  parallel_for(problems.size(), g.threads, [&](std::size_t i) {
    const std::string name = cfg.layer_name(i);
    try {
      const ProcessorPair init = pair_for(cfg.processor, problems[i], i);
      const std::size_t block = resolve_block_size(problems[i].d_in(), cfg.fit.reg_block);
      const DiagnosticsReport before = run_battery(problems[i], init, quant, block);
      const FitLoss l0 = fresh_fit_loss(init, problems[i], quant, cfg.fit.lambda_bd, cfg.fit.reg_block);
      const FitResult res = fit_layer(problems[i], init, cfg.fit);
      const DiagnosticsReport after = run_battery(problems[i], res.pair, quant, block);
      const FitLoss l1 = fresh_fit_loss(res.pair, problems[i], quant, cfg.fit.lambda_bd, cfg.fit.reg_block);

      const fs::path base = fs::path(cfg.out_dir) / name;
      write_processor_file(base.string() + ".u.hrp", res.pair.u);
      write_processor_file(base.string() + ".v.hrp", res.pair.v);
      sink.write_file(base.string() + ".trace.csv", res.trace.to_csv());
      sink.write_file(base.string() + ".report.csv", "layer,phase," + report_csv_header() + "\n" + name +
                                                         ",before," + report_csv_row(before) + "\n" + name +
                                                         ",after," + report_csv_row(after) + "\n");
      rows[i] = name + ',' + std::to_string(cfg.fit.steps) + ',' + std::to_string(res.trace.quantizer_calls) + ',' +
                fmt(l0.l_fit) + ',' + fmt(l1.l_fit) + ',' + fmt(before.l_diag) + ',' + fmt(after.l_diag) + ',' +
                fmt(before.offblock_fraction) + ',' + fmt(after.offblock_fraction) + '\n';
    } catch (const Error& e) {
      throw Error(e.code(), "layer " + name + ": " + e.message());
    }
  });
  std::string body =
      "layer,steps,quantizer_calls,L_fit_initial,L_fit_final,L_diag_rht,L_diag_fit,offblock_rht,offblock_fit\n";
  for (const auto& r : rows) body += r;
  sink.write(out, body);
  return kOk;
}

struct DiagArgs {
  std::string u, v;
  std::string w, h;
  std::string quantizer;
  std::size_t sweep = 0;
  bool table = false;
};

int cmd_diag(const Globals& g, const DiagArgs& a, std::ostream& out) {
  Globals g2 = g;
  if (!a.w.empty()) g2.overrides.push_back("w_path=" + a.w);
  if (!a.h.empty()) g2.overrides.push_back("h_path=" + a.h);
  if (!a.quantizer.empty()) g2.overrides.push_back("quantizer=" + a.quantizer);
  const RunConfig cfg = load_config(g2);
  const auto problems = load_problems(cfg);
  if (a.u.empty() != a.v.empty()) throw ConfigError(0, "--u and --v must be given together");
  if (!a.u.empty() && (problems.size() != 1 || a.sweep)) {
    throw ConfigError(0, "processor files apply to a single problem without --sweep");
  }
  const Quantizer quant(cfg.fit.quantizer);

  // One job per (problem, sign seed); a sweep varies the sign seed of the
  // zero-parameter pair on every problem.
  const std::size_t seeds = a.sweep ? a.sweep : 1;
  std::vector<DiagnosticsReport> reports(problems.size() * seeds);
  std::vector<std::string> labels(reports.size());
  parallel_for(reports.size(), g.threads, [&](std::size_t j) {
    const std::size_t i = j / seeds, k = j % seeds;
    ProcessorOptions o = cfg.processor;
    if (a.sweep) o.sign_seed = SeededRng{cfg.processor.sign_seed.seed + k};
    const ProcessorPair pair = a.u.empty() ? pair_for(o, problems[i], i)
                                           : ProcessorPair{read_processor_file(a.u).processor,
                                                           read_processor_file(a.v).processor};
    if (pair.u.dim() != problems[i].d_out() || pair.v.dim() != problems[i].d_in()) {
      fail(Errc::invalid_input, "processor dimensions do not match the layer");
    }
    reports[j] = run_battery(problems[i], pair, quant, resolve_block_size(problems[i].d_in(), cfg.fit.reg_block));
    labels[j] = cfg.layer_name(i) + (a.sweep ? "," + std::to_string(o.sign_seed.seed) : "");
  });
  if (a.table) {
    out << report_table(reports);
    if (reports.size() > 1) {
      const DiagnosticsReport mean = aggregate(reports);
      out << "mean over " << reports.size() << " rows:\n" << report_table(std::span(&mean, 1));
    }
    return kOk;
  }
  std::string body = std::string(a.sweep ? "layer,sign_seed," : "layer,") + report_csv_header() + "\n";
  for (std::size_t j = 0; j < reports.size(); ++j) body += labels[j] + "," + report_csv_row(reports[j]) + "\n";
  if (reports.size() > 1) body += std::string(a.sweep ? "mean,," : "mean,") + report_csv_row(aggregate(reports)) + "\n";
  CsvSink(g, "diag").write(out, body);
  return kOk;
}

struct PackArgs {
  std::string u, v;
};

// Largest |a - s q| and whether it stays within s/2 plus one ulp everywhere.
std::pair<double, bool> reconstruction_error(const HarpProcessor& orig, const PackedProcessor& pp,
                                             const HarpProcessor& rec) {
  double worst = 0.0;
  bool ok = true;
  const Schedule& s = orig.schedule();
  std::size_t k = 0;
  for (std::size_t pass = 0; pass < orig.passes(); ++pass)
    for (std::size_t t = 0; t < s.stages(); ++t)
      for (std::size_t c = 0; c < s.blocks[t]; ++c) {
        const double scale = pp.scales[k++];
        const std::size_t off = orig.block_offset(pass, t, c);
        for (std::size_t j = off; j < off + block_param_count(s.radices[t]); ++j) {
          const double e = std::abs(orig.theta()[j] - rec.theta()[j]);
          worst = std::max(worst, e);
          const double bound = scale / 2 + std::nextafter(std::abs(orig.theta()[j]), INFINITY) - std::abs(orig.theta()[j]);
          if (e > bound) ok = false;
        }
      }
  return {worst, ok};
}

int cmd_pack(const Globals& g, const PackArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(g);
  fs::create_directories(cfg.out_dir);
  const HarpProcessor u = read_processor_file(a.u).processor;
  const HarpProcessor v = read_processor_file(a.v).processor;
  const PackedProcessor pu = pack_int8(u), pv = pack_int8(v);
  const auto [eu, oku] = reconstruction_error(u, pu, unpack(pu));
  const auto [ev, okv] = reconstruction_error(v, pv, unpack(pv));
  const fs::path ou = fs::path(cfg.out_dir) / (fs::path(a.u).stem().string() + ".q.hrp");
  const fs::path ov = fs::path(cfg.out_dir) / (fs::path(a.v).stem().string() + ".q.hrp");
  write_processor_file(ou, pu);
  write_processor_file(ov, pv);

  const double base = cfg.fit.quantizer.bits;
  const double bpp32 = overhead_bpp(storage_bits(u), storage_bits(v), u.dim(), v.dim(), base);
  const double bpp8 = overhead_bpp(storage_bits(pu), storage_bits(pv), u.dim(), v.dim(), base);
  std::ostringstream os;
  os << "u_params,v_params,u_max_error,v_max_error,within_bound,base_bits,bpp_float32,bpp_int8\n"
     << u.param_count() << ',' << v.param_count() << ',' << fmt(eu) << ',' << fmt(ev) << ',' << (oku && okv) << ','
     << base << ',' << fmt(bpp32) << ',' << fmt(bpp8) << '\n';
  CsvSink(g, "pack").write(out, os.str());
  return kOk;
}

struct UnpackArgs {
  std::string in, out;
};

int cmd_unpack(const UnpackArgs& a, std::ostream& out) {
  const DecodedProcessor d = read_processor_file(a.in);
  write_processor_file(a.out, d.processor);
  out << "wrote " << a.out << " (" << d.processor.param_count() << " parameters, source payload "
      << (d.payload == PayloadKind::int8 ? "int8" : "float32") << ")\n";
  return kOk;
}

struct BenchArgs {
  std::string dims = "512,1024,2048,4096";
  std::size_t rows = 16;
  std::size_t reps = 3;
  bool timing = false;
};

int cmd_bench(const Globals& g, const BenchArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_config(g);
  const auto dims = *parse_list(a.dims);
  if (a.rows == 0 || a.reps == 0) throw ConfigError(0, "--rows and --reps must be positive");
  std::ostringstream os;
  os << "dim,schedule,multiplies_per_row,expected,match" << (a.timing ? ",ns_per_row" : "") << '\n';
  bool all_match = true;
  for (std::size_t d : dims) {
    ProcessorOptions o = cfg.processor;
    o.radices.reset();
    HarpProcessor p = make_processor(d, o);
    RngStream rng(SeededRng{cfg.seed}.derive(d));
    for (double& t : p.theta()) t = 0.1 * rng.gaussian();
    const Matrix x = gaussian_matrix(SeededRng{cfg.seed}.derive(d + 1), a.rows, d);
    ApplyStats stats;
    double best = INFINITY;
    for (std::size_t r = 0; r < a.reps; ++r) {
      ApplyStats one;
      const auto t0 = std::chrono::steady_clock::now();
      const Matrix y = apply(p, x, &one);
      const auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double, std::nano>(t1 - t0).count() / double(a.rows));
      stats = one;
    }
    const std::uint64_t per_row = stats.multiplies / a.rows;
    std::uint64_t expected = p.passes() * p.kron_order() * multiply_count(p.schedule());
    if (p.mode() == ProcessorMode::kronecker) expected += p.kron_order() * p.kron_order() * p.inner_dim();
    const bool match = per_row == expected && stats.multiplies % a.rows == 0;
    all_match = all_match && match;
    os << d << ',' << join_radices(p.schedule()) << ',' << per_row << ',' << expected << ',' << match;
    if (a.timing) os << ',' << fmt(best);
    os << '\n';
  }
  CsvSink(g, "bench").write(out, os.str());
  if (!all_match) {
    err << "harp: counted multiplies differ from the schedule cost\n";
    return kRuntime;
  }
  return kOk;
}

struct SweepArgs {
  std::string axis;
  std::string radices = "2,4,8,16";
};

struct SweepPoint {
  double l_diag_init = 0.0;
  double l_diag_fit = 0.0;
};

SweepPoint sweep_point(const Globals& g, const RunConfig& cfg, const ProcessorOptions& opts,
                       const std::vector<LayerProblem>& problems) {
  const Quantizer quant(cfg.fit.quantizer);
  std::vector<SweepPoint> pts(problems.size());
  parallel_for(problems.size(), g.threads, [&](std::size_t i) {
    const ProcessorPair init = pair_for(opts, problems[i], i);
    pts[i].l_diag_init = run_battery(problems[i], init, quant).l_diag;
    const FitResult res = fit_layer(problems[i], init, cfg.fit);
    pts[i].l_diag_fit = run_battery(problems[i], res.pair, quant).l_diag;
  });
  SweepPoint mean;
  for (const auto& p : pts) {
    mean.l_diag_init += p.l_diag_init / double(pts.size());
    mean.l_diag_fit += p.l_diag_fit / double(pts.size());
  }
  return mean;
}

int cmd_sweep(const Globals& g, const SweepArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(g);
  const auto problems = load_problems(cfg);
  std::ostringstream os;
  if (a.axis == "radix") {
    os << "radix,schedule_u,schedule_v,param_count_u,param_count_v,L_diag_init,L_diag_fit,rel_reduction\n";
    const std::vector<std::size_t> grid = *parse_list(a.radices);
    for (std::size_t b : grid) {
      ProcessorOptions o = cfg.processor;
      o.radices.reset();
      o.kronecker = false;
      o.base_radix = b;
      o.max_radix = std::max(cfg.processor.max_radix, b);
      const ProcessorPair shape = pair_for(o, problems.front(), 0);
      const SweepPoint pt = sweep_point(g, cfg, o, problems);
      os << b << ',' << join_radices(shape.u.schedule()) << ',' << join_radices(shape.v.schedule()) << ','
         << shape.u.param_count() << ',' << shape.v.param_count() << ',' << fmt(pt.l_diag_init) << ','
         << fmt(pt.l_diag_fit) << ',' << fmt(1.0 - pt.l_diag_fit / pt.l_diag_init) << '\n';
    }
  } else if (a.axis == "mixer") {
    os << "mixers,L_diag_init,L_diag_fit,rel_reduction\n";
    for (MixerPolicy m : {MixerPolicy::identity, MixerPolicy::standard}) {
      ProcessorOptions o = cfg.processor;
      o.mixers = m;
      const SweepPoint pt = sweep_point(g, cfg, o, problems);
      os << (m == MixerPolicy::identity ? "identity" : "hadamard+qr") << ',' << fmt(pt.l_diag_init) << ','
         << fmt(pt.l_diag_fit) << ',' << fmt(1.0 - pt.l_diag_fit / pt.l_diag_init) << '\n';
    }
  } else {
    throw ConfigError(0, "sweep axis must be radix or mixer");
  }
  CsvSink(g, "sweep").write(out, os.str());
  return kOk;
}

int cmd_config(const Globals& g, std::ostream& out) {
  out << load_config(g).to_text();
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learnable mixed-radix orthogonal processors for low-bit quantization", "harp"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  g.threads = default_threads();
  app.add_option("--config,--spec", g.config_path, "key=value configuration file");
  app.add_option("--set", g.overrides, "override one config key (key=value), repeatable");
  app.add_option("--seed", g.seed, "problem seed (config key 'seed')");
  app.add_option("--out-dir", g.out_dir, "output directory (config key 'out_dir')");
  app.add_option("--threads", g.threads, "worker threads across independent problems")->check(CLI::PositiveNumber);
  app.add_flag("--no-timestamp", g.no_timestamp, "omit the timestamp comment line from CSV output");

  int status = kOk;
  std::function<int()> run;

  auto* sc = app.add_subcommand("schedule", "print the mixed-radix schedule for a dimension");
  ScheduleArgs sa;
  sc->add_option("dim,--dim", sa.dim, "dimension (defaults to d_in)");
  sc->add_option("--base", sa.base, "preferred radix");
  sc->add_option("--max", sa.max, "largest radix");
  sc->add_option("--radices", sa.radices, "explicit comma-separated radices");
  sc->callback([&] { run = [&] { return cmd_schedule(g, sa, out); }; });

  auto* mx = app.add_subcommand("mixer", "print the base mixer used for a radix");
  std::size_t mixer_radix = 0;
  mx->add_option("radix,--radix", mixer_radix, "block size")->required()->check(CLI::PositiveNumber);
  mx->callback([&] { run = [&] { return cmd_mixer(g, mixer_radix, out); }; });

  auto* eq = app.add_subcommand("equiv-check", "compare the zero-parameter processor with the Hadamard transform");
  EquivArgs ea;
  eq->add_option("--dim", ea.dim, "dimension")->required();
  eq->add_option("--schedule,--radices", ea.radices, "explicit comma-separated radices");
  eq->add_flag("--kron", ea.kron, "Kronecker mode");
  eq->add_option("--kron-order", ea.kron_order, "sign-table order K");
  eq->add_flag("--no-signs", ea.no_signs, "all-plus signs");
  eq->callback([&] { run = [&] { return cmd_equiv_check(g, ea, out, err); }; });

  auto* gen = app.add_subcommand("gen", "write a synthetic problem as tensor files");
  GenArgs ga;
  gen->add_option("--out-w", ga.out_w, "weight tensor path")->required();
  gen->add_option("--out-h", ga.out_h, "second-moment tensor path")->required();
  gen->add_option("--dtype", ga.dtype, "f64 or f32");
  gen->add_option("--index", ga.index, "problem index (seed offset)");
  gen->callback([&] { run = [&] { return cmd_gen(g, ga, out); }; });

  auto* fit = app.add_subcommand("fit", "fit processors for each configured layer");
  fit->callback([&] { run = [&] { return cmd_fit(g, out); }; });

  auto* diag = app.add_subcommand("diag", "diagnostics for processors on each configured layer");
  DiagArgs da;
  diag->add_option("--u", da.u, "output-side processor file");
  diag->add_option("--v", da.v, "input-side processor file");
  diag->add_option("--w-file", da.w, "weight tensor file (config key w_path)");
  diag->add_option("--h-file", da.h, "second-moment tensor file (config key h_path)");
  diag->add_option("--quantizer", da.quantizer, "quantizer spec, e.g. scalar:bits=2,group=8");
  diag->add_option("--sweep", da.sweep, "evaluate the zero-parameter pair over this many sign seeds");
  diag->add_flag("--table", da.table, "fixed-width table instead of CSV");
  diag->callback([&] { run = [&] { return cmd_diag(g, da, out); }; });

  auto* pack = app.add_subcommand("pack", "int8-pack a processor pair and report the bitrate overhead");
  PackArgs pa;
  pack->add_option("--u", pa.u, "output-side processor file")->required();
  pack->add_option("--v", pa.v, "input-side processor file")->required();
  pack->callback([&] { run = [&] { return cmd_pack(g, pa, out); }; });

  auto* unpk = app.add_subcommand("unpack", "expand a packed processor file to float32 parameters");
  UnpackArgs ua;
  unpk->add_option("--in", ua.in, "packed processor file")->required();
  unpk->add_option("--out", ua.out, "output processor file")->required();
  unpk->callback([&] { run = [&] { return cmd_unpack(ua, out); }; });

  auto* bench = app.add_subcommand("bench", "count (and optionally time) multiplies per apply");
  BenchArgs ba;
  bench->add_option("--dims", ba.dims, "comma-separated dimensions");
  bench->add_option("--rows", ba.rows, "rows per apply");
  bench->add_option("--reps", ba.reps, "timing repetitions (minimum is reported)");
  bench->add_flag("--timing", ba.timing, "add a wall-clock column");
  bench->callback([&] { run = [&] { return cmd_bench(g, ba, out, err); }; });

  auto* sweep = app.add_subcommand("sweep", "radix or mixer ablation over the configured problems");
  SweepArgs wa;
  sweep->add_option("axis", wa.axis, "radix or mixer")->required();
  sweep->add_option("--radices", wa.radices, "radix grid");
  sweep->callback([&] { run = [&] { return cmd_sweep(g, wa, out); }; });

  auto* cfgcmd = app.add_subcommand("config", "print the effective configuration");
  cfgcmd->callback([&] { run = [&] { return cmd_config(g, out); }; });

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    status = run();
  } catch (const ConfigError& e) {
    err << "harp: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "harp: " << e.what() << '\n';
    return (e.code() == Errc::format_error || e.code() == Errc::io_error) ? kFormat : kRuntime;
  } catch (const std::exception& e) {
    err << "harp: " << e.what() << '\n';
    return kRuntime;
  }
  return status;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace harp::cli

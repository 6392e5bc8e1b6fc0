#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hypertest/circuit.hpp"
#include "hypertest/covdb.hpp"
#include "hypertest/decompose.hpp"
#include "hypertest/gentest.hpp"
#include "hypertest/gif.hpp"
#include "hypertest/saf.hpp"
#include "hypertest/shp.hpp"
#include "hypertest/shp_sim.hpp"
#include "hypertest/sim.hpp"
#include "hypertest/text_util.hpp"

using namespace hypertest;

namespace {

struct Failure {
  std::string message;
};

std::vector<VectorProgram> load_tests(const std::string& path) {
  if (std::filesystem::is_directory(path)) return load_vector_dir(path);
  return {load_vectors(path)};
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") std::cout << text;
  else write_file_atomic(path, text);
}

GifOptions gif_options(const std::string& mode, const std::string& model) {
  GifOptions o;
  o.mode = gif_mode_from_name(mode);
  o.model = gif_model_from_name(model);
  return o;
}

std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  for (auto& n : split(s, ','))
    if (!n.empty()) out.push_back(n);
  return out;
}

int cmd_parse(const std::string& file, bool print) {
  Circuit c = load_circuit(file);
  if (print) {
    std::cout << print_circuit(c);
    return 0;
  }
  Levelization lv = levelize(c);
  std::cout << "circuit " << c.name() << " inputs=" << c.input_ports().size() << " outputs=" << c.output_ports().size()
            << " nets=" << c.nets().size() << " gates=" << c.gates().size() << " registers=" << c.registers().size()
            << " levels=" << lv.max_level << " controllable_bits=" << c.controllable_bits() << "\n";
  return 0;
}

int cmd_transform(const std::string& file, unsigned C, unsigned D, const std::string& out) {
  Circuit c = load_circuit(file);
  ShpCircuit s = shp_transform(c, C, D);
  PathCheck pc = check_paths(s);
  emit(write_shp(s), out);
  std::cerr << "shp C=" << s.C << " D=" << s.D << " cr_bits=" << s.cr_bits() << " crossings=" << pc.min_crossings
            << ".." << pc.max_crossings << (pc.ok ? " ok" : " FAILED") << "\n";
  for (const auto& p : pc.problems) std::cerr << "  " << p << "\n";
  return pc.ok ? 0 : 1;
}

int cmd_sim(const std::string& file, const std::string& vec, const std::string& trace_out) {
  Circuit c = load_circuit(file);
  VectorProgram p = load_vectors(vec);
  Trace t = simulate(c, p);
  emit(print_trace(c, t), trace_out);
  for (const auto& m : t.mismatches)
    std::cerr << vec << ": cycle " << m.cycle << ": " << m.output << " expected " << hex(m.expected) << " got "
              << hex(m.actual) << "\n";
  return t.mismatches.empty() ? 0 : 1;
}

struct ShpSimArgs {
  std::string shp;
  std::vector<std::string> progs;
  std::string sched;
  unsigned redundant = 0;
  std::string inject;
  unsigned latency = 1;
  bool alt_banks = false;
  std::uint64_t f_micro = 0;
};

int cmd_shpsim(const ShpSimArgs& a) {
  ShpCircuit s = load_shp(a.shp);
  std::map<int, VectorProgram> programs;
  for (const auto& spec : a.progs) {
    auto eq = spec.find('=');
    if (eq == std::string::npos) throw Failure{"--prog expects <thread>=<file.vec>, got '" + spec + "'"};
    auto t = parse_uint(spec.substr(0, eq), 10);
    if (!t) throw Failure{"bad thread index in '" + spec + "'"};
    programs[static_cast<int>(*t)] = load_vectors(spec.substr(eq + 1));
  }
  if (programs.empty()) throw Failure{"no programs given"};

  if (a.redundant > 0) {
    TcConfig tc;
    tc.R = a.redundant;
    tc.compare_latency = a.latency;
    tc.alternating_banks = a.alt_banks;
    std::vector<SeuEvent> seu = a.inject.empty() ? std::vector<SeuEvent>{} : load_seu(a.inject);
    RedundantResult r = run_redundant(s, tc, programs.begin()->second, seu);
    std::cout << print_trace(s.base, r.trace) << print_report(r.report);
    return r.report.unrecoverable ? 1 : 0;
  }

  Schedule sched = a.sched.empty() ? round_robin(s.D, s.C) : load_schedule(a.sched);
  auto problems = check_schedule(sched, s.C, s.D);
  if (!problems.empty()) {
    for (const auto& p : problems) std::cerr << a.sched << ": " << p << "\n";
    return 1;
  }
  auto traces = run_shp(s, sched, programs);
  int rc = 0;
  for (const auto& [t, tr] : traces) {
    std::cout << "thread " << t << "\n" << print_trace(s.base, tr);
    for (const auto& m : tr.mismatches) {
      std::cerr << "thread " << t << ": cycle " << m.cycle << ": " << m.output << " expected " << hex(m.expected)
                << " got " << hex(m.actual) << "\n";
      rc = 1;
    }
  }
  if (a.f_micro) {
    FavgReport f = favg(sched, Rational(static_cast<std::int64_t>(a.f_micro)));
    for (const auto& [t, v] : f.per_thread) std::cout << "favg thread=" << t << " mhz=" << v.decimal() << " exact=" << v.str() << "\n";
    std::cout << "favg idle mhz=" << f.idle.decimal() << "\n";
  }
  return rc;
}

int cmd_gifsim(const std::string& file, const std::string& tests, const std::string& mode, const std::string& model,
               const std::string& out) {
  Circuit c = load_circuit(file);
  GifUniverse u = enumerate_gifs(c, gif_options(mode, model));
  CoverageDb db = CoverageDb::for_universe(u);
  for (const auto& cs : gif_fault_sim(c, load_tests(tests), u)) {
    std::cout << "test " << cs.test << " cycles=" << cs.cycles << " covered=" << cs.covered.count() << "/" << u.size()
              << "\n";
    db.add(cs);
  }
  Bitset all = db.accumulate_all();
  std::cout << "summary items=" << u.size() << " covered=" << all.count() << " coverage=" << percent(all.count(), u.size())
            << "%\n";
  write_db(db, out);
  return 0;
}

GateCircuit netlist(const Circuit& c, const std::string& decomp, bool dup) {
  return expand(c, ExpandOptions{decomp_from_name(decomp), dup});
}

int cmd_safsim(const std::string& file, const std::string& decomp, bool dup, const std::string& tests,
               const std::string& report, unsigned threads, bool no_collapse) {
  Circuit c = load_circuit(file);
  GateCircuit g = netlist(c, decomp, dup);
  auto progs = load_tests(tests);
  SafCoverage cov = saf_fault_sim(g, progs, threads, !no_collapse);
  emit(print_saf_report(g, cov, compute_tcpn(progs, g)), report);
  if (!report.empty() && report != "-") {
    std::cout << "summary faults=" << cov.faults.size() << " testable=" << cov.count(Testability::Testable)
              << " detected=" << cov.detected_testable() << " missed=" << cov.missed().size() << "\n";
  }
  return 0;
}

int cmd_merge(const std::vector<std::string>& inputs, const std::string& out) {
  std::vector<CoverageDb> dbs;
  for (const auto& p : inputs) dbs.push_back(read_db(p));
  CoverageDb m = merge(dbs);
  write_db(m, out);
  std::cout << "merged " << inputs.size() << " databases, " << m.tests().size() << " tests\n";
  return 0;
}

GifUniverse universe_for(const Circuit& c, const CoverageDb& db) {
  GifUniverse u = enumerate_gifs(c, gif_options(db.header().mode, db.header().model));
  if (u.hash != db.header().hash)
    throw Failure{"database hash " + db.header().hash + " does not match circuit " + c.name() + " (" + u.hash + ")"};
  return u;
}

int cmd_report(const std::string& dbfile, const std::string& file, const std::string& tests, bool show_uncovered,
               const std::string& path, bool coverable) {
  CoverageDb db = read_db(dbfile);
  Circuit c = load_circuit(file);
  GifUniverse u = universe_for(c, db);
  Bitset cov = tests == "all" ? db.accumulate_all() : db.accumulate(split_names(tests));
  std::cout << print_hierarchy(report_hierarchy(u, cov));
  GifClassification cls;
  if (coverable) {
    cls = classify_coverable(c, u);
    if (cls.count(Coverability::Unclassified) > 0) {
      std::cout << "coverable unclassified (" << c.controllable_bits() << " controllable bits)\n";
    } else {
      CoverableCoverage cc = coverable_coverage(cls, cov);
      std::cout << "coverable " << cc.covered << "/" << cc.coverable << " " << percent(cc.covered, cc.coverable)
                << "% uncoverable=" << cls.count(Coverability::Uncoverable) << "\n";
    }
  }
  if (show_uncovered)
    for (const auto& it : uncovered(u, cov)) {
      if (!path_contains(path, it.path)) continue;
      std::cout << "uncovered " << it.path << " " << it.text;
      if (coverable) std::cout << " " << coverability_name(cls.status[it.index]);
      std::cout << "\n";
    }
  return 0;
}

int cmd_tcpn(const std::string& file, const std::string& tests, const std::string& decomp, bool dup) {
  Circuit c = load_circuit(file);
  GateCircuit g = netlist(c, decomp, dup);
  TcpnReport r = compute_tcpn(load_tests(tests), g);
  std::cout << "tcpn cycles=" << r.cycles << " nets=" << r.nets << " value=" << r.tcpn.decimal() << " exact=" << r.tcpn.str()
            << "\n";
  return 0;
}

int cmd_serve(const std::string& dbfile, const std::string& file, const std::string& host, int port,
              const std::string& static_dir) {
  CoverageDb db = read_db(dbfile);
  Circuit c = load_circuit(file);
  CoverageApi api(db, universe_for(c, db));
  ApiServer server(api, static_dir);
  int bound = server.bind(host, port);
  if (bound < 0) throw Failure{"cannot bind " + host + ":" + std::to_string(port)};
  std::cout << "serving " << c.name() << " on http://" << host << ":" << bound << "\n" << std::flush;
  return server.listen() ? 0 : 1;
}

int cmd_gentests(const std::string& file, const std::string& mode, const std::string& model, const std::string& out,
                 GenOptions opt) {
  Circuit c = load_circuit(file);
  GifUniverse u = enumerate_gifs(c, gif_options(mode, model));
  GifClassification cls = classify_coverable(c, u);
  if (cls.count(Coverability::Unclassified) > 0)
    throw Failure{c.name() + " has " + std::to_string(c.controllable_bits()) +
                  " controllable bits; test generation needs the exhaustive classification"};
  GenResult g = generate_tests(c, u, cls, opt);
  CoverableCoverage cc = coverable_coverage(cls, g.covered);
  std::string text = "# generated: " + std::string(gif_mode_name(u.options.mode)) + "/" +
                     std::string(gif_model_name(u.options.model)) + " items " + std::to_string(cc.covered) + "/" +
                     std::to_string(cc.coverable) + " coverable covered, seed " + std::to_string(opt.seed) + "\n";
  emit(text + print_vectors(g.program), out);
  std::cerr << "cycles=" << g.program.cycles.size() << " coverable=" << cc.coverable << " covered=" << cc.covered
            << " unreached=" << g.unreached.size() << "\n";
  return cc.complete() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyper-pipelined test tooling: SHP transform, GIF and stuck-at fault simulation, coverage databases"};
  app.require_subcommand(1);
  int rc = 0;

  const std::vector<std::string> modes = {"site", "path", "kmap"}, models = {"go", "po"}, decomps = {"A", "B"};

  auto* parse = app.add_subcommand("parse", "Parse and validate a .ckt file");
  std::string p_file;
  bool p_print = false;
  parse->add_option("circuit", p_file, "Circuit file")->required()->check(CLI::ExistingFile);
  parse->add_flag("--print", p_print, "Print the canonical form");
  parse->callback([&] { rc = cmd_parse(p_file, p_print); });

  auto* tr = app.add_subcommand("transform", "Apply the C-slow / barrel transform");
  std::string t_file, t_out;
  unsigned t_c = 1, t_d = 0;
  tr->add_option("circuit", t_file, "Circuit file")->required()->check(CLI::ExistingFile);
  tr->add_option("--csr", t_c, "C-slow factor C")->check(CLI::Range(1u, 64u));
  tr->add_option("--barrel", t_d, "Thread count D (default C)")->check(CLI::Range(1u, 1024u));
  tr->add_option("--out", t_out, "Output .shp file (default stdout)");
  tr->callback([&] { rc = cmd_transform(t_file, t_c, t_d ? t_d : t_c, t_out); });

  auto* sim = app.add_subcommand("sim", "Functional cycle simulation of a vector program");
  std::string s_file, s_vec, s_trace;
  sim->add_option("circuit", s_file, "Circuit file")->required()->check(CLI::ExistingFile);
  sim->add_option("program", s_vec, "Vector program")->required()->check(CLI::ExistingFile);
  sim->add_option("--trace", s_trace, "Trace output file (default stdout)");
  sim->callback([&] { rc = cmd_sim(s_file, s_vec, s_trace); });

  auto* shp = app.add_subcommand("shpsim", "Micro-cycle simulation of a transformed circuit");
  ShpSimArgs sa;
  shp->add_option("shp", sa.shp, "Transformed circuit (.shp)")->required()->check(CLI::ExistingFile);
  shp->add_option("--prog", sa.progs, "Thread program, <thread>=<file.vec>")->required();
  shp->add_option("--sched", sa.sched, "Schedule file (default round robin)")->check(CLI::ExistingFile);
  shp->add_option("--redundant", sa.redundant, "Run the first program on R redundant threads")->check(CLI::Range(2u, 64u));
  shp->add_option("--inject", sa.inject, "Single-event-upset file (.seu)")->check(CLI::ExistingFile);
  shp->add_option("--compare-latency", sa.latency, "Macro-cycles between execution and comparison");
  shp->add_flag("--alt-banks", sa.alt_banks, "Alternate state banks for redundant threads");
  shp->add_option("--f-micro", sa.f_micro, "Micro-clock in MHz; prints per-thread Favg");
  shp->callback([&] { rc = cmd_shpsim(sa); });

  auto* gif = app.add_subcommand("gifsim", "GIF fault simulation into a coverage database");
  std::string g_file, g_tests, g_mode = "site", g_model = "po", g_out;
  gif->add_option("circuit", g_file, "Circuit file")->required()->check(CLI::ExistingFile);
  gif->add_option("--tests", g_tests, "Vector file or directory of .vec files")->required()->check(CLI::ExistingPath);
  gif->add_option("--mode", g_mode, "GIF mode")->check(CLI::IsMember(modes));
  gif->add_option("--model", g_model, "Observation model")->check(CLI::IsMember(models));
  gif->add_option("--out", g_out, "Output .gcdb")->required();
  gif->callback([&] { rc = cmd_gifsim(g_file, g_tests, g_mode, g_model, g_out); });

  auto* saf = app.add_subcommand("safsim", "Stuck-at fault simulation on a gate-level expansion");
  std::string f_file, f_decomp = "A", f_tests, f_report;
  bool f_dup = false, f_nocollapse = false;
  unsigned f_threads = 1;
  saf->add_option("circuit", f_file, "Circuit file")->required()->check(CLI::ExistingFile);
  saf->add_option("--decomp", f_decomp, "Decomposition")->check(CLI::IsMember(decomps));
  saf->add_flag("--dup", f_dup, "Duplicate shared gate outputs per consumer");
  saf->add_option("--tests", f_tests, "Vector file or directory of .vec files")->required()->check(CLI::ExistingPath);
  saf->add_option("--report", f_report, "Report file (default stdout)");
  saf->add_option("--threads", f_threads, "Worker threads")->check(CLI::Range(1u, 256u));
  saf->add_flag("--no-collapse", f_nocollapse, "Simulate every fault, not one per equivalence class");
  saf->callback([&] { rc = cmd_safsim(f_file, f_decomp, f_dup, f_tests, f_report, f_threads, f_nocollapse); });

  auto* mg = app.add_subcommand("merge", "Merge coverage databases");
  std::vector<std::string> m_in;
  std::string m_out;
  mg->add_option("databases", m_in, "Input .gcdb files")->required()->check(CLI::ExistingFile);
  mg->add_option("--out", m_out, "Output .gcdb")->required();
  mg->callback([&] { rc = cmd_merge(m_in, m_out); });

  auto* rp = app.add_subcommand("report", "Hierarchical coverage report");
  std::string r_db, r_file, r_tests = "all", r_path;
  bool r_unc = false, r_cov = false;
  rp->add_option("database", r_db, "Coverage database")->required()->check(CLI::ExistingFile);
  rp->add_option("--circuit", r_file, "Circuit the database was built from")->required()->check(CLI::ExistingFile);
  rp->add_option("--tests", r_tests, "Comma-separated test names, or 'all'");
  rp->add_flag("--uncovered", r_unc, "List uncovered items");
  rp->add_option("--path", r_path, "Restrict the uncovered listing to a hierarchy path");
  rp->add_flag("--coverable", r_cov, "Classify items by exhaustive search and report coverable coverage");
  rp->callback([&] { rc = cmd_report(r_db, r_file, r_tests, r_unc, r_path, r_cov); });

  auto* tc = app.add_subcommand("tcpn", "Test cycles per net");
  std::string c_file, c_tests, c_decomp = "A";
  bool c_dup = false;
  tc->add_option("circuit", c_file, "Circuit file")->required()->check(CLI::ExistingFile);
  tc->add_option("--tests", c_tests, "Vector file or directory of .vec files")->required()->check(CLI::ExistingPath);
  tc->add_option("--decomp", c_decomp, "Decomposition")->check(CLI::IsMember(decomps));
  tc->add_flag("--dup", c_dup, "Duplicate shared gate outputs per consumer");
  tc->callback([&] { rc = cmd_tcpn(c_file, c_tests, c_decomp, c_dup); });

  auto* sv = app.add_subcommand("serve", "Read-only HTTP API over a coverage database");
  std::string v_db, v_file, v_host = "127.0.0.1", v_static;
  int v_port = 8080;
  sv->add_option("database", v_db, "Coverage database")->required()->check(CLI::ExistingFile);
  sv->add_option("--circuit", v_file, "Circuit the database was built from")->required()->check(CLI::ExistingFile);
  sv->add_option("--host", v_host, "Bind address");
  sv->add_option("--port", v_port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  sv->add_option("--static", v_static, "Directory of static files to serve at /")->check(CLI::ExistingDirectory);
  sv->callback([&] { rc = cmd_serve(v_db, v_file, v_host, v_port, v_static); });

  auto* gt = app.add_subcommand("gentests", "Generate a test reaching every coverable GIF item");
  std::string n_file, n_mode = "site", n_model = "po", n_out;
  GenOptions n_opt;
  gt->add_option("circuit", n_file, "Circuit file")->required()->check(CLI::ExistingFile);
  gt->add_option("--mode", n_mode, "GIF mode")->check(CLI::IsMember(modes));
  gt->add_option("--model", n_model, "Observation model")->check(CLI::IsMember(models));
  gt->add_option("--out", n_out, "Output .vec file (default stdout)");
  gt->add_option("--seed", n_opt.seed, "Random seed");
  gt->add_option("--random-cycles", n_opt.random_cycles, "Random warm-up cycles");
  gt->add_option("--max-cycles", n_opt.max_cycles, "Cycle budget");
  gt->callback([&] { rc = cmd_gentests(n_file, n_mode, n_model, n_out, n_opt); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const DiagnosticError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << "error: " << d.str() << "\n";
    return 1;
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}

#include "hypertest/shp_sim.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "hypertest/text_util.hpp"

namespace hypertest {

// --- schedules ---------------------------------------------------------------

Schedule parse_schedule(std::string_view text) {
  Schedule s;
  s.repeat = false;
  bool have_window = false;
  int lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    auto toks = tokenize(strip_comment(raw));
    if (toks.empty()) continue;
    if (toks[0].text == "window") {
      if (have_window) throw DiagnosticError({{lineno, toks[0].col, "duplicate window"}});
      have_window = true;
      for (std::size_t i = 1; i < toks.size(); ++i) {
        if (toks[i].text == "-") {
          s.window.push_back(kIdle);
          continue;
        }
        auto v = parse_uint(toks[i].text, 10);
        if (!v) throw DiagnosticError({{lineno, toks[i].col, "bad slot '" + toks[i].text + "'"}});
        s.window.push_back(static_cast<int>(*v));
      }
    } else if (toks[0].text == "repeat" && toks.size() == 1) {
      s.repeat = true;
    } else {
      throw DiagnosticError({{lineno, toks[0].col, "unknown schedule statement '" + toks[0].text + "'"}});
    }
  }
  if (!have_window || s.window.empty()) throw DiagnosticError({{lineno, 1, "schedule needs a non-empty window"}});
  return s;
}

Schedule load_schedule(const std::string& path) { return parse_schedule(read_file(path)); }

std::string print_schedule(const Schedule& s) {
  std::ostringstream os;
  os << "window";
  for (int t : s.window) {
    if (t == kIdle) os << " -";
    else os << ' ' << t;
  }
  os << "\n";
  if (s.repeat) os << "repeat\n";
  return os.str();
}

Schedule round_robin(unsigned threads, unsigned C) {
  Schedule s;
  for (unsigned t = 0; t < threads; ++t) s.window.push_back(static_cast<int>(t));
  while (s.window.size() < C) s.window.push_back(kIdle);
  return s;
}

std::vector<std::string> check_schedule(const Schedule& s, unsigned C, unsigned D) {
  std::vector<std::string> out;
  std::map<int, std::vector<std::size_t>> pos;
  for (std::size_t i = 0; i < s.window.size(); ++i) {
    int t = s.window[i];
    if (t == kIdle) continue;
    if (t < 0 || static_cast<unsigned>(t) >= D) {
      out.push_back("unknown thread " + std::to_string(t) + " at slot " + std::to_string(i));
      continue;
    }
    pos[t].push_back(i);
  }
  const std::size_t W = s.window.size();
  for (const auto& [t, ps] : pos) {
    for (std::size_t i = 1; i < ps.size(); ++i)
      if (ps[i] - ps[i - 1] < C)
        out.push_back("thread " + std::to_string(t) + " reissued after " + std::to_string(ps[i] - ps[i - 1]) +
                      " micro-cycles at slot " + std::to_string(ps[i]) + " (needs " + std::to_string(C) + ")");
    if (s.repeat) {
      std::size_t wrap = W - ps.back() + ps.front();
      if (wrap < C)
        out.push_back("thread " + std::to_string(t) + " reissued after " + std::to_string(wrap) +
                      " micro-cycles across the window boundary (needs " + std::to_string(C) + ")");
    }
  }
  return out;
}

// --- rationals -----------------------------------------------------------------


Rational FavgReport::total() const {
  Rational t = idle;
  for (const auto& [k, v] : per_thread) t = t + v;
  return t;
}

FavgReport favg(const Schedule& s, Rational f_micro) {
  if (s.window.empty()) throw std::invalid_argument("favg: empty window");
  const auto W = static_cast<std::int64_t>(s.window.size());
  std::map<int, std::int64_t> count;
  std::int64_t idle = 0;
  for (int t : s.window) {
    if (t == kIdle) ++idle;
    else ++count[t];
  }
  FavgReport r;
  for (const auto& [t, n] : count) r.per_thread[t] = Rational(n, W) * f_micro;
  r.idle = Rational(idle, W) * f_micro;
  return r;
}

// --- pipeline -------------------------------------------------------------------

namespace {

constexpr std::uint64_t kPoison = 0x5a5a5a5a5a5a5a5aull;

}  // namespace

Pipeline::Pipeline(const ShpCircuit& s) : s_(s), ev_(s.base), stage_gates_(s.C), slots_(s.C) {
  for (GateId g : ev_.order()) stage_gates_[s.stage[g]].push_back(g);
  in_bank_.assign(s.banks.size(), std::vector<bool>(s.base.nets().size(), false));
  for (std::size_t b = 0; b < s.banks.size(); ++b)
    for (NetId n : s.banks[b]) in_bank_[b][n] = true;
}

bool Pipeline::empty() const {
  return std::none_of(slots_.begin(), slots_.end(), [](const auto& t) { return t.has_value(); });
}

void Pipeline::latch(std::size_t bank, Token& t) const {
  const Circuit& c = s_.base;
  std::vector<std::uint64_t> v(c.nets().size());
  for (NetId n = 0; n < v.size(); ++n) v[n] = in_bank_[bank][n] ? t.values[n] : (kPoison & width_mask(c.width(n)));
  t.values = std::move(v);
}

std::optional<Pipeline::Completion> Pipeline::step(std::optional<Token> issue) {
  const Circuit& c = s_.base;
  if (issue) {
    Token& t = *issue;
    t.values.assign(c.nets().size(), 0);
    for (NetId n = 0; n < c.nets().size(); ++n) t.values[n] = kPoison & width_mask(c.width(n));
    auto ins = c.input_ports();
    for (std::size_t i = 0; i < ins.size(); ++i) t.values[c.ports()[ins[i]].net] = t.inputs[i];
    for (std::size_t r = 0; r < c.registers().size(); ++r) t.values[c.registers()[r].q] = t.state[r];
    slots_[0] = std::move(issue);
  }
  for (std::size_t st = 0; st < slots_.size(); ++st) {
    if (!slots_[st]) continue;
    std::swap(ev_.values(), slots_[st]->values);
    ev_.eval_gates(stage_gates_[st]);
    std::swap(ev_.values(), slots_[st]->values);
  }
  std::optional<Completion> done;
  if (auto& last = slots_.back()) {
    Completion comp;
    for (auto p : c.output_ports()) comp.outputs.push_back(last->values[c.ports()[p].net]);
    for (const auto& r : c.registers()) comp.next_state.push_back(last->values[r.d]);
    comp.token = std::move(*last);
    comp.token.values.clear();
    last.reset();
    done = std::move(comp);
  }
  for (std::size_t st = slots_.size(); st-- > 1;) {
    slots_[st] = std::move(slots_[st - 1]);
    slots_[st - 1].reset();
    if (slots_[st]) latch(st - 1, *slots_[st]);
  }
  return done;
}

bool Pipeline::flip_cr(NetId net, unsigned boundary, unsigned bit) {
  if (boundary + 1 >= slots_.size()) return false;
  auto& t = slots_[boundary + 1];
  if (!t || !in_bank_[boundary][net] || bit >= s_.base.width(net)) return false;
  t->values[net] ^= std::uint64_t{1} << bit;
  return true;
}

// --- run_shp --------------------------------------------------------------------

std::map<int, Trace> run_shp(const ShpCircuit& s, const Schedule& sched,
                             const std::map<int, VectorProgram>& programs) {
  const Circuit& c = s.base;
  if (auto errs = check_schedule(sched, s.C, s.D); !errs.empty()) throw std::invalid_argument(errs.front());
  std::map<int, std::vector<std::vector<std::uint64_t>>> inputs;
  for (const auto& [t, p] : programs) {
    if (t < 0 || static_cast<unsigned>(t) >= s.D) throw std::invalid_argument("unknown thread " + std::to_string(t));
    if (std::find(sched.window.begin(), sched.window.end(), t) == sched.window.end() && !p.cycles.empty())
      throw std::invalid_argument("thread " + std::to_string(t) + " has a program but is never scheduled");
    inputs[t] = resolve_inputs(c, p);
  }
  std::vector<std::vector<std::uint64_t>> mem(s.D, initial_state(c));
  std::map<int, std::size_t> next;
  std::map<int, Trace> traces;
  std::size_t remaining = 0;
  for (const auto& [t, in] : inputs) {
    traces[t].cycles.resize(in.size());
    next[t] = 0;
    remaining += in.size();
  }
  Pipeline pipe(s);
  const std::size_t W = sched.window.size();
  for (std::uint64_t m = 0; remaining > 0 || !pipe.empty(); ++m) {
    if (!sched.repeat && m >= W && remaining > 0 && pipe.empty())
      throw std::invalid_argument("schedule ends before all programs complete");
    int t = (sched.repeat || m < W) ? sched.window[m % W] : kIdle;
    std::optional<Pipeline::Token> issue;
    if (t != kIdle) {
      auto it = inputs.find(t);
      if (it != inputs.end() && next[t] < it->second.size()) {
        Pipeline::Token tok;
        tok.thread = t;
        tok.macro = next[t]++;
        tok.inputs = it->second[tok.macro];
        tok.state = mem[s.memory_map[t]];
        issue = std::move(tok);
        --remaining;
      }
    }
    if (auto done = pipe.step(std::move(issue))) {
      const auto& tok = done->token;
      mem[s.memory_map[tok.thread]] = done->next_state;
      traces[tok.thread].cycles[tok.macro] = {tok.inputs, done->outputs, tok.state};
    }
  }
  const auto outs = c.output_ports();
  for (auto& [t, tr] : traces) {
    tr.final_state = mem[s.memory_map[t]];
    const auto& prog = programs.at(t);
    for (std::size_t k = 0; k < prog.cycles.size(); ++k)
      for (const auto& [name, want] : prog.cycles[k].expect)
        for (std::size_t o = 0; o < outs.size(); ++o)
          if (c.ports()[outs[o]].name == name && tr.cycles[k].outputs[o] != want)
            tr.mismatches.push_back({k, name, want, tr.cycles[k].outputs[o]});
  }
  return traces;
}

// --- SEU files --------------------------------------------------------------------

std::vector<SeuEvent> parse_seu(std::string_view text) {
  std::vector<SeuEvent> out;
  std::vector<Diagnostic> diags;
  int lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    auto toks = tokenize(strip_comment(raw));
    if (toks.empty()) continue;
    if (toks[0].text != "inject") {
      diags.push_back({lineno, toks[0].col, "expected 'inject'"});
      continue;
    }
    SeuEvent e;
    e.line = lineno;
    bool have_cycle = false, have_elem = false;
    for (std::size_t i = 1; i < toks.size(); ++i) {
      auto [k, v] = split_kv(toks[i].text);
      auto num = parse_uint(v, 10);
      if (k == "elem" && !v.empty()) {
        e.element = v;
        have_elem = true;
      } else if (k == "cycle" && num) {
        e.micro_cycle = *num;
        have_cycle = true;
      } else if (k == "thread" && num) {
        e.thread = static_cast<int>(*num);
      } else if (k == "bit" && num) {
        e.bit = static_cast<unsigned>(*num);
      } else {
        diags.push_back({lineno, toks[i].col, "bad field '" + toks[i].text + "'"});
      }
    }
    if (!have_cycle || !have_elem) diags.push_back({lineno, 1, "inject needs cycle= and elem="});
    out.push_back(std::move(e));
  }
  if (!diags.empty()) throw DiagnosticError(std::move(diags));
  return out;
}

std::vector<SeuEvent> load_seu(const std::string& path) { return parse_seu(read_file(path)); }

// --- redundancy ---------------------------------------------------------------------

namespace {

struct ResolvedSeu {
  std::uint64_t cycle = 0;
  bool cr = false;
  std::uint32_t reg = 0;
  NetId net = 0;
  unsigned boundary = 0;
  int thread = 0;
  unsigned bit = 0;
  std::string text;
};

ResolvedSeu resolve_seu(const ShpCircuit& s, const SeuEvent& e) {
  const Circuit& c = s.base;
  ResolvedSeu r;
  r.cycle = e.micro_cycle;
  r.thread = e.thread;
  r.bit = e.bit;
  r.text = "cycle=" + std::to_string(e.micro_cycle) + " elem=" + e.element + " thread=" + std::to_string(e.thread) +
           " bit=" + std::to_string(e.bit);
  auto bad = [&](const std::string& m) { throw DiagnosticError({{e.line, 1, m}}); };
  if (e.element.rfind("cr:", 0) == 0) {
    auto parts = split(e.element, ':');
    if (parts.size() != 3) bad("cr target must be cr:<net>:<boundary>");
    auto n = c.find_net(parts[1]);
    auto b = parse_uint(parts[2], 10);
    if (!n) bad("unknown net '" + parts[1] + "'");
    if (!b || *b + 1 >= s.C) bad("bank index out of range");
    r.cr = true;
    r.net = *n;
    r.boundary = static_cast<unsigned>(*b);
    if (std::find(s.banks[r.boundary].begin(), s.banks[r.boundary].end(), r.net) == s.banks[r.boundary].end())
      bad("net '" + parts[1] + "' is not held in bank " + parts[2]);
    if (e.bit >= c.width(r.net)) bad("bit out of range");
    return r;
  }
  auto reg = c.find_register(e.element);
  if (!reg) bad("unknown storage element '" + e.element + "'");
  if (e.thread < 0 || static_cast<unsigned>(e.thread) >= s.D) bad("thread out of range");
  if (e.bit >= c.width(c.registers()[*reg].q)) bad("bit out of range");
  r.reg = *reg;
  return r;
}

using State = std::vector<std::uint64_t>;

// Index of a value held by a strict majority, or -1.
template <class T>
int majority(const std::vector<T>& xs) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::size_t n = 0;
    for (const auto& y : xs) n += y == xs[i];
    if (2 * n > xs.size()) return static_cast<int>(i);
  }
  return -1;
}

struct RoundRun {
  std::size_t k = 0;
  std::uint64_t m0 = 0;
  std::uint64_t id = 0;
  int read_bank = 0;
  int write_bank = 0;
  std::vector<State> snapshot;
  std::vector<std::optional<Pipeline::Completion>> results;
  bool verdict_done = false;
  bool ok = false;
  bool dead = false;
  std::size_t writes = 0;
};

}  // namespace

RedundantResult run_redundant(const ShpCircuit& s, const TcConfig& tc_in, const VectorProgram& p,
                              const std::vector<SeuEvent>& injections) {
  const Circuit& c = s.base;
  TcConfig tc = tc_in;
  if (tc.threads.empty())
    for (unsigned r = 0; r < tc.R; ++r) tc.threads.push_back(static_cast<int>(r));
  const unsigned R = tc.R;
  if (R < 3 || R % 2 == 0) throw std::invalid_argument("R must be odd and >= 3");
  if (R > s.D) throw std::invalid_argument("R must not exceed D");
  if (tc.threads.size() != R) throw std::invalid_argument("need exactly R redundant thread ids");
  {
    std::set<int> ids(tc.threads.begin(), tc.threads.end());
    if (ids.size() != R) throw std::invalid_argument("redundant thread ids must be distinct");
    for (int t : ids)
      if (t < 0 || static_cast<unsigned>(t) >= s.D) throw std::invalid_argument("unknown thread " + std::to_string(t));
  }
  const std::uint64_t W = std::max<std::uint64_t>(s.C, R);
  const std::uint64_t L = tc.compare_latency;
  if (L < 1) throw std::invalid_argument("compare latency must be >= 1");
  if (!tc.alternating_banks && std::max<std::uint64_t>(L, R) > s.C)
    throw std::invalid_argument("compare latency or R above C needs alternating banks");
  if (tc.alternating_banks && L > W + s.C) throw std::invalid_argument("compare latency too large (max W+C)");

  std::vector<ResolvedSeu> seus;
  for (const auto& e : injections) seus.push_back(resolve_seu(s, e));
  std::stable_sort(seus.begin(), seus.end(), [](const auto& a, const auto& b) { return a.cycle < b.cycle; });

  const auto inputs = resolve_inputs(c, p);
  const std::size_t n = inputs.size();
  const Trace ref = simulate(c, p);

  std::vector<std::vector<State>> mem(2, std::vector<State>(s.D, initial_state(c)));
  auto addr = [&](unsigned r) { return s.memory_map[tc.threads[r]]; };

  RedundantResult res;
  auto& rep = res.report;
  res.trace.cycles.resize(n);
  std::vector<bool> recorded(n, false);

  Pipeline pipe(s);
  std::vector<RoundRun> runs;  // active
  std::size_t next_k = 0;
  std::uint64_t next_start = 0;
  std::uint64_t next_id = 1;
  int committed_bank = 0;  // bank holding the latest committed state
  int next_read_bank = 0;
  std::size_t seu_i = 0;
  bool halted = false;

  std::uint64_t m = 0;
  const std::uint64_t limit = (n + 4) * W * 8 + 64 + (seus.empty() ? 0 : seus.back().cycle);
  for (; !halted; ++m) {
    if (m > limit * 4) throw std::runtime_error("redundant run did not converge");
    // 1. injections
    for (; seu_i < seus.size() && seus[seu_i].cycle == m; ++seu_i) {
      const auto& e = seus[seu_i];
      if (e.cr) {
        if (!pipe.flip_cr(e.net, e.boundary, e.bit)) rep.notes.push_back("no token in CR bank: " + e.text);
      } else {
        // the bank holding this thread's live state: what its next read will see
        int bank = next_read_bank;
        if (!runs.empty()) {
          const RoundRun& last = runs.back();
          auto pos = std::find(tc.threads.begin(), tc.threads.end(), e.thread);
          std::uint64_t r = static_cast<std::uint64_t>(pos - tc.threads.begin());
          bank = (pos != tc.threads.end() && m > last.m0 + r) ? last.write_bank : last.read_bank;
        }
        mem[bank][s.memory_map[e.thread]][e.reg] ^= std::uint64_t{1} << e.bit;
      }
    }
    // 2. start a round
    if (next_k < n && m == next_start) {
      RoundRun run;
      run.k = next_k;
      run.m0 = m;
      run.id = next_id++;
      run.read_bank = next_read_bank;
      run.write_bank = tc.alternating_banks ? 1 - run.read_bank : run.read_bank;
      run.snapshot.resize(R);
      run.results.resize(R);
      next_read_bank = run.write_bank;
      runs.push_back(std::move(run));
      ++next_k;
      next_start = m + W;
    }
    // 3. issue (the start state doubles as the compare read)
    std::optional<Pipeline::Token> issue;
    for (auto& run : runs) {
      if (m < run.m0 || m - run.m0 >= R) continue;
      unsigned r = static_cast<unsigned>(m - run.m0);
      Pipeline::Token tok;
      tok.thread = static_cast<int>(r);  // position in the redundant group
      tok.macro = run.k;
      tok.tag = run.id;
      tok.inputs = inputs[run.k];
      tok.state = mem[run.read_bank][addr(r)];
      run.snapshot[r] = tok.state;
      issue = std::move(tok);
    }
    // 4. verdicts, before any write of this micro-cycle
    for (std::size_t i = 0; i < runs.size(); ++i) {
      RoundRun& run = runs[i];
      if (run.dead || run.verdict_done || m != run.m0 + std::max<std::uint64_t>(L, R) - 1) continue;
      run.verdict_done = true;
      int maj = majority(run.snapshot);
      bool all_same = std::all_of(run.snapshot.begin(), run.snapshot.end(),
                                  [&](const State& x) { return x == run.snapshot[0]; });
      if (all_same) {
        run.ok = true;
        continue;
      }
      if (maj < 0) {
        for (unsigned r = 0; r < R; ++r) rep.detections.push_back({m, run.k, tc.threads[r], false});
        rep.unrecoverable = true;
        rep.unrecoverable_round = run.k;
        halted = true;
        break;
      }
      const State good = run.snapshot[static_cast<std::size_t>(maj)];
      int donor = -1;
      for (unsigned r = 0; r < R; ++r)
        if (run.snapshot[r] == good) {
          donor = tc.threads[r];
          break;
        }
      for (unsigned r = 0; r < R; ++r) {
        if (run.snapshot[r] == good) continue;
        rep.detections.push_back({m, run.k, tc.threads[r], false});
        mem[run.read_bank][addr(r)] = good;
        rep.recoveries.push_back({m, run.k, tc.threads[r], donor});
      }
      ++rep.repeated_cycles;
      // abandon this round and everything started after it
      std::set<std::uint64_t> gone;
      for (std::size_t j = i; j < runs.size(); ++j) gone.insert(runs[j].id);
      pipe.squash([&](const Pipeline::Token& t) { return gone.count(t.tag) > 0; });
      committed_bank = run.read_bank;
      next_read_bank = run.read_bank;
      next_k = run.k;
      next_start = std::max(next_start, m + 1);
      runs.erase(runs.begin() + static_cast<std::ptrdiff_t>(i), runs.end());
      break;
    }
    if (halted) break;
    if (issue && std::none_of(runs.begin(), runs.end(), [&](const RoundRun& r) { return r.id == issue->tag; }))
      issue.reset();
    if (auto done = pipe.step(std::move(issue))) {
      auto it = std::find_if(runs.begin(), runs.end(), [&](const RoundRun& r) { return r.id == done->token.tag; });
      if (it != runs.end()) {
        RoundRun& run = *it;
        const unsigned r = static_cast<unsigned>(done->token.thread);
        if (!tc.alternating_banks && !run.verdict_done) throw std::logic_error("write before verdict");
        mem[run.write_bank][addr(r)] = done->next_state;
        run.results[r] = std::move(*done);
        ++run.writes;
      }
    }
    // 5. retire finished rounds in order
    while (!runs.empty() && runs.front().verdict_done && runs.front().ok && runs.front().writes == R) {
      RoundRun& run = runs.front();
      TraceCycle tcy;
      tcy.inputs = inputs[run.k];
      tcy.state = run.snapshot[0];
      const std::size_t nouts = run.results[0]->outputs.size();
      for (std::size_t o = 0; o < nouts; ++o) {
        std::vector<std::uint64_t> vals;
        for (unsigned r = 0; r < R; ++r) vals.push_back(run.results[r]->outputs[o]);
        int mi = majority(vals);
        tcy.outputs.push_back(vals[mi < 0 ? 0 : static_cast<std::size_t>(mi)]);
      }
      res.trace.cycles[run.k] = std::move(tcy);
      recorded[run.k] = true;
      committed_bank = run.write_bank;
      runs.erase(runs.begin());
    }
    if (next_k >= n && runs.empty() && pipe.empty()) {
      ++m;
      break;
    }
  }
  rep.micro_cycles = m;

  if (!rep.unrecoverable) {
    // final drain comparison
    std::vector<State> fin;
    for (unsigned r = 0; r < R; ++r) fin.push_back(mem[committed_bank][addr(r)]);
    int maj = majority(fin);
    bool all_same = std::all_of(fin.begin(), fin.end(), [&](const State& x) { return x == fin[0]; });
    if (!all_same) {
      if (maj < 0) {
        for (unsigned r = 0; r < R; ++r) rep.detections.push_back({m, n, tc.threads[r], true});
        rep.unrecoverable = true;
        rep.unrecoverable_round = n;
      } else {
        const State good = fin[static_cast<std::size_t>(maj)];
        int donor = -1;
        for (unsigned r = 0; r < R; ++r)
          if (fin[r] == good) {
            donor = tc.threads[r];
            break;
          }
        for (unsigned r = 0; r < R; ++r) {
          if (fin[r] == good) continue;
          rep.detections.push_back({m, n, tc.threads[r], true});
          rep.recoveries.push_back({m, n, tc.threads[r], donor});
          mem[committed_bank][addr(r)] = good;
          fin[r] = good;
        }
      }
    }
    if (!rep.unrecoverable) res.trace.final_state = fin[0];
    rep.final_equivalent = !rep.unrecoverable &&
                           std::all_of(fin.begin(), fin.end(), [&](const State& x) { return x == ref.final_state; });
  }
  if (rep.unrecoverable) {
    std::size_t kept = 0;
    while (kept < n && recorded[kept]) ++kept;
    res.trace.cycles.resize(kept);
  }
  const auto outs = c.output_ports();
  for (std::size_t k = 0; k < res.trace.cycles.size(); ++k)
    for (const auto& [name, want] : p.cycles[k].expect)
      for (std::size_t o = 0; o < outs.size(); ++o)
        if (c.ports()[outs[o]].name == name && res.trace.cycles[k].outputs[o] != want)
          res.trace.mismatches.push_back({k, name, want, res.trace.cycles[k].outputs[o]});
  return res;
}

std::string print_report(const RedundancyReport& r) {
  std::ostringstream os;
  for (const auto& d : r.detections)
    os << "detect micro=" << d.micro_cycle << " macro=" << d.round << " thread=" << d.thread
       << (d.final_check ? " final" : "") << "\n";
  for (const auto& v : r.recoveries)
    os << "recover micro=" << v.micro_cycle << " macro=" << v.round << " replaced=" << v.replaced
       << " donor=" << v.donor << "\n";
  for (const auto& note : r.notes) os << "note " << note << "\n";
  os << "repeated_cycles " << r.repeated_cycles << "\n";
  os << "micro_cycles " << r.micro_cycles << "\n";
  os << "unrecoverable " << (r.unrecoverable ? 1 : 0);
  if (r.unrecoverable) os << " macro=" << r.unrecoverable_round;
  os << "\n";
  os << "final_equivalent " << (r.final_equivalent ? 1 : 0) << "\n";
  return os.str();
}

// --- non-interference ---------------------------------------------------------------

bool check_noninterference(const ShpCircuit& s, const Schedule& sched, const std::vector<int>& functional,
                           const std::vector<int>& test, const std::map<int, VectorProgram>& programs) {
  for (int t : functional)
    if (std::find(test.begin(), test.end(), t) != test.end())
      throw std::invalid_argument("functional and test thread sets overlap");
  std::map<int, VectorProgram> fprog;
  for (int t : functional) fprog[t] = programs.at(t);
  std::map<int, VectorProgram> all = fprog;
  for (int t : test) all[t] = programs.at(t);
  Schedule solo = sched;
  for (int& slot : solo.window)
    if (std::find(test.begin(), test.end(), slot) != test.end()) slot = kIdle;
  auto with = run_shp(s, sched, all);
  auto without = run_shp(s, solo, fprog);
  for (int t : functional)
    if (!with.at(t).same_signals(without.at(t))) return false;
  return true;
}

}  // namespace hypertest

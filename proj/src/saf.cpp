#include "hypertest/saf.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "hypertest/text_util.hpp"

namespace hypertest {

namespace {

struct UnionFind {
  std::vector<std::uint32_t> p;
  explicit UnionFind(std::size_t n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  std::uint32_t find(std::uint32_t x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) p[std::min(a, b)] = std::max(a, b);
  }
};

}  // namespace

std::vector<Saf> enumerate_safs(const GateCircuit& g, bool collapse) {
  const auto locs = fault_locations(g);
  const auto& uses = g.uses();
  std::vector<std::uint32_t> stem_index(g.nets().size());
  for (std::uint32_t i = 0; i < locs.size(); ++i)
    if (locs[i].is_stem()) stem_index[locs[i].net] = i;

  auto pin_loc = [&](std::uint32_t k, unsigned pin) -> std::uint32_t {
    BitId n = g.gates()[k].in[pin];
    if (uses[n].size() <= 1) return stem_index[n];
    for (std::uint32_t u = 0; u < uses[n].size(); ++u)
      if (!uses[n][u].is_sink && uses[n][u].index == k && uses[n][u].pin == pin) return stem_index[n] + 1 + u;
    throw std::logic_error("pin use not found");
  };
  auto id = [](std::uint32_t loc, bool v) { return loc * 2 + (v ? 1u : 0u); };

  UnionFind uf(locs.size() * 2);
  for (std::uint32_t k = 0; k < g.gates().size(); ++k) {
    const auto& gt = g.gates()[k];
    const std::uint32_t out = stem_index[gt.out];
    switch (gt.kind) {
      case SimpleKind::Not:
        uf.unite(id(pin_loc(k, 0), false), id(out, true));
        uf.unite(id(pin_loc(k, 0), true), id(out, false));
        break;
      case SimpleKind::And2:
        for (unsigned p = 0; p < 2; ++p) uf.unite(id(pin_loc(k, p), false), id(out, false));
        break;
      case SimpleKind::Or2:
        for (unsigned p = 0; p < 2; ++p) uf.unite(id(pin_loc(k, p), true), id(out, true));
        break;
      default:
        break;
    }
  }

  std::vector<Saf> all;
  std::map<std::uint32_t, std::uint32_t> cls_of_root;
  for (std::uint32_t f = 0; f < locs.size() * 2; ++f) {
    std::uint32_t root = uf.find(f);
    if (root == f) cls_of_root.emplace(root, 0);
  }
  std::uint32_t next = 0;
  for (auto& [root, c] : cls_of_root) c = next++;
  for (std::uint32_t f = 0; f < locs.size() * 2; ++f) {
    std::uint32_t root = uf.find(f);
    all.push_back({locs[f / 2], (f & 1) != 0, cls_of_root.at(root), root == f});
  }
  if (!collapse) return all;
  std::vector<Saf> reps;
  for (const auto& s : all)
    if (s.rep) reps.push_back(s);
  return reps;
}

std::string saf_name(const GateCircuit& g, const Saf& f) { return loc_name(g, f.loc) + (f.value ? "/1" : "/0"); }

std::string_view testability_name(Testability t) {
  switch (t) {
    case Testability::Testable: return "testable";
    case Testability::Untestable: return "untestable";
    case Testability::Unclassified: return "unclassified";
  }
  return "?";
}

namespace {

void load_batch(const GateCircuit& g, const std::vector<BitId>& src, const std::vector<std::uint64_t>& w,
                std::vector<std::uint64_t>& v) {
  for (std::size_t k = 0; k < src.size(); ++k) v[src[k]] = w[k];
  g.eval(v);
}

StuckFault stuck(const Saf& f) { return {f.loc, f.value}; }

}  // namespace

std::vector<Testability> classify_testable(const GateCircuit& g, const std::vector<Saf>& faults, unsigned max_bits) {
  const auto src = g.sources();
  if (src.size() > max_bits) return std::vector<Testability>(faults.size(), Testability::Unclassified);
  const unsigned bits = static_cast<unsigned>(src.size());
  const std::uint64_t total = std::uint64_t{1} << bits;
  const std::size_t nb = static_cast<std::size_t>((total + 63) / 64);
  std::vector<Testability> out(faults.size(), Testability::Untestable);
  std::vector<std::size_t> open(faults.size());
  std::iota(open.begin(), open.end(), 0);
  std::vector<std::uint64_t> v(g.nets().size(), 0);
  FaultEvaluator fe(g);
  for (std::size_t b = 0; b < nb && !open.empty(); ++b) {
    load_batch(g, src, exhaustive_batch(b, bits), v);
    const std::uint64_t n = std::min<std::uint64_t>(64, total - b * 64);
    const std::uint64_t lanes = n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
    std::vector<std::size_t> still;
    for (std::size_t i : open) {
      fe.run(v, stuck(faults[i]));
      if (fe.detect_mask() & lanes) out[i] = Testability::Testable;
      else still.push_back(i);
    }
    open = std::move(still);
  }
  return out;
}

Testability classify_testable(const GateCircuit& g, const Saf& f, unsigned max_bits) {
  return classify_testable(g, std::vector<Saf>{f}, max_bits)[0];
}

FrameSet gate_frames(const GateCircuit& g, const VectorProgram& p) {
  const auto src = g.sources();
  FrameSet fs(src.size());
  std::map<std::string, std::uint64_t> cur;
  for (const auto& [name, bits] : g.input_ports()) cur[name] = 0;
  std::vector<bool> state;
  for (const auto& r : g.regs()) state.push_back(r.init);
  std::vector<std::uint64_t> v(g.nets().size(), 0);
  std::vector<Diagnostic> diags;
  for (const auto& cyc : p.cycles) {
    for (const auto& [name, val] : cyc.set) {
      auto it = cur.find(name);
      if (it == cur.end()) {
        diags.push_back({cyc.line, 0, "unknown input '" + name + "'"});
        continue;
      }
      if (val & ~width_mask(static_cast<unsigned>(g.input_ports().at(name).size())))
        diags.push_back({cyc.line, 0, "value " + hex(val) + " too wide for '" + name + "'"});
      it->second = val;
    }
    for (const auto& [name, bits] : g.input_ports())
      for (std::size_t i = 0; i < bits.size(); ++i) v[bits[i]] = ((cur[name] >> i) & 1) ? ~std::uint64_t{0} : 0;
    for (std::size_t r = 0; r < g.regs().size(); ++r) v[g.regs()[r].q] = state[r] ? ~std::uint64_t{0} : 0;
    g.eval(v);
    std::vector<bool> frame(src.size());
    for (std::size_t k = 0; k < src.size(); ++k) frame[k] = v[src[k]] & 1;
    fs.push(frame);
    for (std::size_t r = 0; r < g.regs().size(); ++r) state[r] = v[g.sinks()[g.regs()[r].sink].net] & 1;
  }
  if (!diags.empty()) throw DiagnosticError(std::move(diags));
  return fs;
}

Bitset saf_detect(const GateCircuit& g, const std::vector<Saf>& faults, const FrameSet& frames, unsigned threads) {
  const auto src = g.sources();
  std::vector<std::vector<std::uint64_t>> good(frames.batches(), std::vector<std::uint64_t>(g.nets().size(), 0));
  for (std::size_t b = 0; b < frames.batches(); ++b) load_batch(g, src, frames.batch(b), good[b]);

  std::vector<char> hit(faults.size(), 0);
  auto work = [&](std::size_t lo, std::size_t hi) {
    FaultEvaluator fe(g);
    for (std::size_t i = lo; i < hi; ++i)
      for (std::size_t b = 0; b < good.size(); ++b) {
        fe.run(good[b], stuck(faults[i]));
        if (fe.detect_mask() & frames.lane_mask(b)) {
          hit[i] = 1;
          break;
        }
      }
  };
  threads = std::max(1u, threads);
  if (threads == 1 || faults.size() < 2) {
    work(0, faults.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (faults.size() + threads - 1) / threads;
    for (std::size_t lo = 0; lo < faults.size(); lo += chunk)
      pool.emplace_back(work, lo, std::min(faults.size(), lo + chunk));
    for (auto& t : pool) t.join();
  }
  Bitset out(faults.size());
  for (std::size_t i = 0; i < faults.size(); ++i)
    if (hit[i]) out.set(i);
  return out;
}

std::size_t SafCoverage::count(Testability t) const { return static_cast<std::size_t>(std::count(status.begin(), status.end(), t)); }

std::size_t SafCoverage::detected_testable() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < faults.size(); ++i) n += detected.test(i) && status[i] == Testability::Testable;
  return n;
}

Rational SafCoverage::coverage() const {
  std::size_t t = count(Testability::Testable);
  if (t == 0) return Rational(1);
  return Rational(static_cast<std::int64_t>(detected_testable()), static_cast<std::int64_t>(t));
}

std::vector<std::size_t> SafCoverage::missed() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < faults.size(); ++i)
    if (status[i] == Testability::Testable && !detected.test(i)) out.push_back(i);
  return out;
}

SafCoverage saf_fault_sim(const GateCircuit& g, const std::vector<VectorProgram>& tests, unsigned threads,
                          bool collapse) {
  SafCoverage cov;
  cov.faults = enumerate_safs(g, collapse);
  cov.status = classify_testable(g, cov.faults);
  cov.detected = Bitset(cov.faults.size());
  for (const auto& p : tests) {
    SafTestResult r{p.name, p.cycles.size(), saf_detect(g, cov.faults, gate_frames(g, p), threads)};
    cov.detected |= r.detected;
    cov.tests.push_back(std::move(r));
  }
  return cov;
}

TcpnReport compute_tcpn(std::uint64_t cycles, std::size_t nets) {
  if (nets == 0) throw std::invalid_argument("tcpn needs a netlist with nets");
  return {cycles, nets, Rational(static_cast<std::int64_t>(cycles), static_cast<std::int64_t>(nets))};
}

TcpnReport compute_tcpn(const std::vector<VectorProgram>& tests, const GateCircuit& g) {
  std::uint64_t cycles = 0;
  for (const auto& p : tests) cycles += p.cycles.size();
  return compute_tcpn(cycles, g.nets().size());
}

std::string print_saf_report(const GateCircuit& g, const SafCoverage& cov, const TcpnReport& tcpn) {
  std::ostringstream os;
  for (std::size_t i = 0; i < cov.faults.size(); ++i)
    os << "saf " << saf_name(g, cov.faults[i]) << ' ' << testability_name(cov.status[i]) << ' '
       << (cov.detected.test(i) ? "detected" : "missed") << "\n";
  for (const auto& t : cov.tests)
    os << "test " << t.name << " cycles=" << t.cycles << " detected=" << t.detected.count() << "\n";
  Rational c = cov.coverage();
  os << "summary faults=" << cov.faults.size() << " testable=" << cov.count(Testability::Testable)
     << " untestable=" << cov.count(Testability::Untestable)
     << " unclassified=" << cov.count(Testability::Unclassified) << " detected=" << cov.detected_testable()
     << " coverage=" << (c * Rational(100)).decimal(2) << "%\n";
  os << "tcpn cycles=" << tcpn.cycles << " nets=" << tcpn.nets << " value=" << tcpn.tcpn.decimal() << " exact="
     << tcpn.tcpn.str() << "\n";
  return os.str();
}

}  // namespace hypertest

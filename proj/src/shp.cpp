#include "hypertest/shp.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "hypertest/text_util.hpp"

namespace hypertest {

std::size_t ShpCircuit::cr_bits() const {
  std::size_t n = 0;
  for (const auto& b : banks)
    for (NetId net : b) n += base.width(net);
  return n;
}

std::vector<unsigned> balanced_stages(const Circuit& c, unsigned C) {
  const auto lv = levelize(c);
  std::vector<unsigned> stage(c.gates().size(), 0);
  if (C <= 1 || c.gates().empty()) return stage;
  std::vector<std::size_t> count(lv.max_level + 1, 0);
  for (GateId g = 0; g < c.gates().size(); ++g) ++count[lv.level[g]];
  const double total = static_cast<double>(c.gates().size());
  std::vector<unsigned> band(lv.max_level + 1, 0);
  std::size_t before = 0;
  for (unsigned l = 1; l <= lv.max_level; ++l) {
    double mid = static_cast<double>(before) + static_cast<double>(count[l]) / 2.0;
    band[l] = std::min(C - 1, static_cast<unsigned>(C * mid / total));
    before += count[l];
  }
  for (GateId g = 0; g < c.gates().size(); ++g) stage[g] = band[lv.level[g]];
  return stage;
}

namespace {

// Stage at which a net becomes available: its driving gate's stage, 0 for sources.
unsigned produced_at(const Circuit& c, const std::vector<unsigned>& stage, NetId n) {
  Driver d = c.driver(n);
  return d.kind == DriverKind::Gate ? stage[d.index] : 0;
}

// Last stage that reads a net; sinks read at the last stage.
std::vector<int> last_use(const Circuit& c, const std::vector<unsigned>& stage, unsigned C) {
  std::vector<int> last(c.nets().size(), -1);
  for (GateId g = 0; g < c.gates().size(); ++g)
    for (NetId n : c.gates()[g].inputs) last[n] = std::max(last[n], static_cast<int>(stage[g]));
  for (auto p : c.output_ports()) last[c.ports()[p].net] = static_cast<int>(C - 1);
  for (const auto& r : c.registers()) last[r.d] = static_cast<int>(C - 1);
  return last;
}

}  // namespace

std::vector<std::vector<NetId>> bank_membership(const Circuit& c, const std::vector<unsigned>& stage, unsigned C) {
  std::vector<std::vector<NetId>> banks(C > 0 ? C - 1 : 0);
  const auto last = last_use(c, stage, C);
  for (NetId n = 0; n < c.nets().size(); ++n) {
    if (last[n] < 0) continue;
    for (unsigned b = produced_at(c, stage, n); static_cast<int>(b) < last[n]; ++b) banks[b].push_back(n);
  }
  return banks;
}

namespace {

ShpCircuit make(const Circuit& c, unsigned C, unsigned D) {
  if (C < 1) throw std::invalid_argument("C must be >= 1");
  if (D < 1) throw std::invalid_argument("D must be >= 1");
  ShpCircuit s;
  s.base = c;
  s.C = C;
  s.D = D;
  s.stage = balanced_stages(c, C);
  s.banks = bank_membership(c, s.stage, C);
  for (unsigned t = 0; t < D; ++t) s.memory_map.push_back(t);
  return s;
}

}  // namespace

ShpCircuit barrel_transform(const Circuit& c, unsigned D) { return make(c, 1, D); }
ShpCircuit cslow_transform(const Circuit& c, unsigned C) { return make(c, C, C); }

ShpCircuit shp_transform(const Circuit& c, unsigned C, unsigned D) {
  if (D < C) throw std::invalid_argument("D must be >= C (got C=" + std::to_string(C) + ", D=" + std::to_string(D) + ")");
  return make(c, C, D);
}

PathCheck check_paths(const ShpCircuit& s) {
  const Circuit& c = s.base;
  PathCheck pc;
  if (s.stage.size() != c.gates().size()) {
    pc.problems.push_back("stage map size mismatch");
    return pc;
  }
  if (s.banks.size() + 1 != s.C) {
    pc.problems.push_back("expected " + std::to_string(s.C - 1) + " banks");
    return pc;
  }
  std::vector<std::vector<bool>> in_bank(s.banks.size(), std::vector<bool>(c.nets().size(), false));
  for (std::size_t b = 0; b < s.banks.size(); ++b)
    for (NetId n : s.banks[b]) in_bank[b][n] = true;

  // crossings on an edge carrying net n from stage `from` to a reader at stage `to`
  auto edge = [&](NetId n, unsigned from, unsigned to, const std::string& what) -> int {
    if (to < from) {
      pc.problems.push_back(what + ": stage decreases along " + c.net(n).name);
      return -1;
    }
    int k = 0;
    for (unsigned b = from; b < to; ++b) {
      if (in_bank[b][n]) ++k;
      else pc.problems.push_back(what + ": net " + c.net(n).name + " missing from bank " + std::to_string(b));
    }
    return k;
  };

  constexpr int kNone = std::numeric_limits<int>::min();
  const auto lv = levelize(c);
  // min/max crossings accumulated from any source to each net
  std::vector<int> lo(c.nets().size(), kNone), hi(c.nets().size(), kNone);
  for (auto p : c.input_ports()) lo[c.ports()[p].net] = hi[c.ports()[p].net] = 0;
  for (const auto& r : c.registers()) lo[r.q] = hi[r.q] = 0;
  auto stage_of_net = [&](NetId n) { return produced_at(c, s.stage, n); };

  for (GateId g : lv.order) {
    const auto& gi = c.gates()[g];
    int glo = std::numeric_limits<int>::max(), ghi = -1;
    bool any = false;
    for (NetId n : gi.inputs) {
      int w = edge(n, stage_of_net(n), s.stage[g], "gate " + gi.id);
      if (w < 0 || lo[n] == kNone) continue;
      any = true;
      glo = std::min(glo, lo[n] + w);
      ghi = std::max(ghi, hi[n] + w);
    }
    if (!any) continue;  // constant-only cone: no source path
    lo[gi.outputs[0]] = glo;
    hi[gi.outputs[0]] = ghi;
  }

  pc.min_crossings = std::numeric_limits<unsigned>::max();
  pc.max_crossings = 0;
  auto sink = [&](NetId n, const std::string& what) {
    int w = edge(n, stage_of_net(n), s.C - 1, what);
    if (w < 0 || lo[n] == kNone) return;
    int l = lo[n] + w, h = hi[n] + w;
    pc.min_crossings = std::min(pc.min_crossings, static_cast<unsigned>(l));
    pc.max_crossings = std::max(pc.max_crossings, static_cast<unsigned>(h));
  };
  for (auto p : c.output_ports()) sink(c.ports()[p].net, "output " + c.ports()[p].name);
  for (const auto& r : c.registers()) sink(r.d, "register " + r.name);
  if (pc.min_crossings == std::numeric_limits<unsigned>::max()) pc.min_crossings = pc.max_crossings = s.C - 1;
  pc.ok = pc.problems.empty() && pc.min_crossings == s.C - 1 && pc.max_crossings == s.C - 1;
  return pc;
}

std::string write_shp(const ShpCircuit& s) {
  std::ostringstream os;
  os << "shp v1\n";
  os << "csr " << s.C << "\n";
  os << "barrel " << s.D << "\n";
  os << "memmap";
  for (unsigned a : s.memory_map) os << ' ' << a;
  os << "\n";
  for (GateId g = 0; g < s.base.gates().size(); ++g) os << "stage " << s.base.gates()[g].id << ' ' << s.stage[g] << "\n";
  for (std::size_t b = 0; b < s.banks.size(); ++b) {
    os << "bank " << b;
    for (NetId n : s.banks[b]) os << ' ' << s.base.net(n).name;
    os << "\n";
  }
  os << "begin\n" << print_circuit(s.base);
  return os.str();
}

ShpCircuit read_shp(std::string_view text) {
  auto fail = [](int line, const std::string& m) { throw DiagnosticError({{line, 1, m}}); };
  std::vector<std::string> lines = split(text, '\n');
  if (lines.empty() || trim(lines[0]) != "shp v1") {
    if (!lines.empty() && trim(lines[0]).rfind("shp ", 0) == 0) fail(1, "unsupported shp version '" + trim(lines[0]) + "'");
    fail(1, "not an shp file (expected 'shp v1')");
  }
  std::size_t k = 1;
  unsigned C = 0, D = 0;
  std::vector<unsigned> memmap;
  std::vector<std::pair<std::string, unsigned>> stages;
  std::vector<std::vector<std::string>> banks;
  for (; k < lines.size(); ++k) {
    auto toks = tokenize(strip_comment(lines[k]));
    const int ln = static_cast<int>(k) + 1;
    if (toks.empty()) continue;
    const auto& kw = toks[0].text;
    if (kw == "begin") break;
    auto num = [&](std::size_t i) {
      if (i >= toks.size()) fail(ln, "missing value");
      auto v = parse_uint(toks[i].text, 10);
      if (!v) fail(ln, "bad number '" + toks[i].text + "'");
      return static_cast<unsigned>(*v);
    };
    if (kw == "csr") C = num(1);
    else if (kw == "barrel") D = num(1);
    else if (kw == "memmap") {
      for (std::size_t i = 1; i < toks.size(); ++i) memmap.push_back(num(i));
    } else if (kw == "stage") {
      if (toks.size() != 3) fail(ln, "expected 'stage <gate> <n>'");
      stages.emplace_back(toks[1].text, num(2));
    } else if (kw == "bank") {
      unsigned b = num(1);
      if (b != banks.size()) fail(ln, "banks must be listed in order");
      banks.emplace_back();
      for (std::size_t i = 2; i < toks.size(); ++i) banks.back().push_back(toks[i].text);
    } else {
      fail(ln, "unknown shp statement '" + kw + "'");
    }
  }
  if (k >= lines.size()) fail(static_cast<int>(k), "missing 'begin' before embedded circuit");
  std::string body;
  for (std::size_t i = k + 1; i < lines.size(); ++i) body += lines[i] + "\n";
  ShpCircuit s;
  s.base = parse_circuit(body);
  s.C = C;
  s.D = D;
  if (C < 1 || D < 1) fail(2, "csr and barrel must be >= 1");
  if (memmap.size() != D) fail(4, "memmap needs " + std::to_string(D) + " entries");
  s.memory_map = memmap;
  s.stage.assign(s.base.gates().size(), 0);
  std::vector<bool> seen(s.base.gates().size(), false);
  for (const auto& [id, st] : stages) {
    auto g = s.base.find_gate(id);
    if (!g) fail(0, "stage for unknown gate '" + id + "'");
    if (st >= C) fail(0, "stage out of range for gate '" + id + "'");
    s.stage[*g] = st;
    seen[*g] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) fail(0, "missing stage assignment");
  if (banks.size() + 1 != C) fail(0, "expected " + std::to_string(C - 1) + " banks");
  for (const auto& b : banks) {
    s.banks.emplace_back();
    for (const auto& n : b) {
      auto id = s.base.find_net(n);
      if (!id) fail(0, "bank references unknown net '" + n + "'");
      s.banks.back().push_back(*id);
    }
  }
  auto pc = check_paths(s);
  if (!pc.ok) fail(0, "path invariant violated" + (pc.problems.empty() ? std::string() : ": " + pc.problems[0]));
  return s;
}

ShpCircuit load_shp(const std::string& path) { return read_shp(read_file(path)); }

}  // namespace hypertest

#include "hypertest/gif.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "hypertest/decompose.hpp"
#include "hypertest/saf.hpp"
#include "hypertest/text_util.hpp"

namespace hypertest {

std::string_view gif_mode_name(GifMode m) {
  switch (m) {
    case GifMode::Site: return "site";
    case GifMode::Path: return "path";
    case GifMode::Kmap: return "kmap";
  }
  return "?";
}

std::string_view gif_model_name(GifModel m) { return m == GifModel::GO ? "go" : "po"; }

GifMode gif_mode_from_name(std::string_view s) {
  if (s == "site") return GifMode::Site;
  if (s == "path") return GifMode::Path;
  if (s == "kmap") return GifMode::Kmap;
  throw std::invalid_argument("unknown GIF mode '" + std::string(s) + "'");
}

GifModel gif_model_from_name(std::string_view s) {
  if (s == "go" || s == "GO") return GifModel::GO;
  if (s == "po" || s == "PO") return GifModel::PO;
  throw std::invalid_argument("unknown GIF model '" + std::string(s) + "'");
}

std::string GifUniverse::item_string(std::size_t k) const {
  const GifItem& it = items[k];
  const GifCore& c = cores[it.core];
  std::string s = "gif " + gates[c.gate].id + " gi=" + std::to_string(c.gi) + " go=" + std::to_string(it.go) +
                  " i=" + std::to_string(c.i);
  if (it.j >= 0) s += " j=" + sinks[static_cast<std::size_t>(it.j)];
  s += it.alpha ? " a=1" : " a=0";
  return s;
}

std::string universe_hash(const Circuit& c, const GifOptions& opt) {
  std::ostringstream os;
  os << kToolVersion << "\nmode " << gif_mode_name(opt.mode) << "\nmodel " << gif_model_name(opt.model)
     << "\npath_cap " << opt.path_cap << "\nkmap_max_bits " << opt.kmap_max_bits << "\n"
     << print_circuit(c);
  return sha256_hex(os.str());
}

namespace {

bool is_wiring(GateKind k) { return k == GateKind::Slice || k == GateKind::Concat; }

using SinkList = std::vector<std::uint32_t>;

// Sinks structurally reachable from every net.
std::vector<SinkList> sink_reach(const GateCircuit& g) {
  std::vector<SinkList> r(g.nets().size());
  auto from_uses = [&](BitId n) {
    SinkList s;
    for (const auto& u : g.uses()[n]) {
      if (u.is_sink) {
        s.push_back(u.index);
      } else {
        const auto& o = r[g.gates()[u.index].out];
        s.insert(s.end(), o.begin(), o.end());
      }
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
  };
  for (std::size_t k = g.gates().size(); k-- > 0;) r[g.gates()[k].out] = from_uses(g.gates()[k].out);
  for (BitId n = 0; n < g.nets().size(); ++n)
    if (g.nets()[n].source != BitSource::Gate) r[n] = from_uses(n);
  return r;
}

SinkList loc_reach(const GateCircuit& g, const std::vector<SinkList>& reach, const FaultLoc& loc) {
  if (loc.is_stem()) return reach[loc.net];
  const Use& u = g.uses()[loc.net][static_cast<std::size_t>(loc.use)];
  if (u.is_sink) return {u.index};
  return reach[g.gates()[u.index].out];
}

// Lowest template input feeding each net (max when none).
std::vector<std::uint32_t> lowest_input(const GateCircuit& g) {
  constexpr std::uint32_t none = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> low(g.nets().size(), none);
  for (std::uint32_t k = 0; k < g.inputs().size(); ++k) low[g.inputs()[k]] = k;
  for (const auto& gt : g.gates()) {
    std::uint32_t m = none;
    for (unsigned p = 0; p < gt.arity(); ++p) m = std::min(m, low[gt.in[p]]);
    low[gt.out] = m;
  }
  return low;
}

void site_cores(const GateCircuit& t, GateId gate, std::vector<GifCore>& out) {
  const auto all = enumerate_safs(t, false);
  const auto reach = sink_reach(t);
  const auto low = lowest_input(t);
  std::map<std::uint32_t, std::vector<const Saf*>> classes;
  for (const auto& f : all) classes[f.cls].push_back(&f);
  std::uint32_t i = 0;
  for (const auto& [cls, members] : classes) {
    // a tie stuck at its own value is no fault at all
    bool noop = std::all_of(members.begin(), members.end(), [&](const Saf* f) {
      BitSource src = t.nets()[f->loc.net].source;
      return f->loc.is_stem() && ((src == BitSource::Tie0 && !f->value) || (src == BitSource::Tie1 && f->value));
    });
    if (noop) continue;
    const Saf* rep = *std::find_if(members.begin(), members.end(), [](const Saf* f) { return f->rep; });
    SinkList gos = loc_reach(t, reach, rep->loc);
    if (gos.empty()) continue;
    GifCore c;
    c.gate = gate;
    c.i = i++;
    c.fault = {rep->loc, rep->value};
    std::uint32_t gi = low[rep->loc.net];
    c.gi = gi == std::numeric_limits<std::uint32_t>::max() ? 0 : gi;
    c.gos.assign(gos.begin(), gos.end());
    out.push_back(std::move(c));
  }
}

void path_cores(const GateCircuit& t, GateId gate, std::size_t cap, const std::string& gate_id,
                std::vector<GifCore>& out) {
  std::vector<std::uint64_t> count(t.nets().size(), 0);
  auto sat_add = [](std::uint64_t a, std::uint64_t b) { return a + b < a ? std::numeric_limits<std::uint64_t>::max() : a + b; };
  auto paths_from = [&](BitId n) {
    std::uint64_t s = 0;
    for (const auto& u : t.uses()[n]) s = sat_add(s, u.is_sink ? 1 : count[t.gates()[u.index].out]);
    return s;
  };
  for (std::size_t k = t.gates().size(); k-- > 0;) count[t.gates()[k].out] = paths_from(t.gates()[k].out);
  std::uint64_t total = 0;
  for (BitId in : t.inputs()) total = sat_add(total, paths_from(in));
  if (total > cap)
    throw std::runtime_error("gate '" + gate_id + "' has " + std::to_string(total) + " paths, above the cap of " +
                             std::to_string(cap));
  std::vector<GifCore> found;
  std::vector<std::pair<std::uint32_t, std::uint8_t>> stack;
  auto dfs = [&](auto&& self, BitId n, std::uint32_t gi) -> void {
    for (const auto& u : t.uses()[n]) {
      if (u.is_sink) {
        GifCore c;
        c.gate = gate;
        c.gi = gi;
        c.path = stack;
        c.gos = {u.index};
        found.push_back(std::move(c));
      } else {
        stack.emplace_back(u.index, u.pin);
        self(self, t.gates()[u.index].out, gi);
        stack.pop_back();
      }
    }
  };
  for (std::uint32_t k = 0; k < t.inputs().size(); ++k) dfs(dfs, t.inputs()[k], k);
  std::stable_sort(found.begin(), found.end(),
                   [](const GifCore& a, const GifCore& b) { return std::pair(a.gi, a.gos[0]) < std::pair(b.gi, b.gos[0]); });
  std::map<std::pair<std::uint32_t, unsigned>, std::uint32_t> next;
  for (auto& c : found) {
    c.i = next[{c.gi, c.gos[0]}]++;
    out.push_back(std::move(c));
  }
}

void kmap_cores(const Circuit& circ, GateId gate, unsigned max_bits, std::vector<GifCore>& out) {
  const auto& g = circ.gates()[gate];
  unsigned n = 0;
  for (NetId in : g.inputs) n += circ.width(in);
  if (n > max_bits)
    throw std::runtime_error("gate '" + g.id + "' has " + std::to_string(n) + " input bits, above the kmap limit of " +
                             std::to_string(max_bits));
  const unsigned w = circ.width(g.outputs[0]);
  for (unsigned go = 0; go < w; ++go)
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
      GifCore c;
      c.gate = gate;
      c.i = static_cast<std::uint32_t>(m);
      c.minterm = m;
      c.gos = {go};
      out.push_back(std::move(c));
    }
}

bool kmap_value(const Circuit& circ, const GifCore& c, unsigned go) {
  const auto& g = circ.gates()[c.gate];
  std::vector<unsigned> widths;
  std::vector<std::uint64_t> ins;
  unsigned shift = 0;
  for (NetId in : g.inputs) {
    unsigned w = circ.width(in);
    widths.push_back(w);
    ins.push_back((c.minterm >> shift) & width_mask(w));
    shift += w;
  }
  return (eval_primitive(g.kind, g.params, widths, circ.width(g.outputs[0]), ins) >> go) & 1;
}

}  // namespace

GifUniverse enumerate_gifs(const Circuit& c, const GifOptions& opt) {
  auto diags = validate(c);
  if (!diags.empty()) throw DiagnosticError(std::move(diags));
  GifUniverse u;
  u.options = opt;
  u.circuit = c.name();
  u.hash = universe_hash(c, opt);
  for (GateId g = 0; g < c.gates().size(); ++g) u.gates.push_back({c.gates()[g].id, c.hier_path(g), c.gates()[g].kind});

  std::vector<Bits> bits;
  const GateCircuit gc = expand(c, ExpandOptions{Decomp::A, false}, &bits);
  for (const auto& s : gc.sinks()) u.sinks.push_back(s.name);
  const auto reach = sink_reach(gc);

  for (GateId g = 0; g < c.gates().size(); ++g) {
    const auto& gate = c.gates()[g];
    if (is_wiring(gate.kind)) continue;
    const std::size_t first = u.cores.size();
    if (opt.mode == GifMode::Kmap) {
      kmap_cores(c, g, opt.kmap_max_bits, u.cores);
    } else {
      const GateCircuit t = build_template(c, g, Decomp::A);
      if (opt.mode == GifMode::Site) site_cores(t, g, u.cores);
      else path_cores(t, g, opt.path_cap, gate.id, u.cores);
    }
    const Bits& out = bits[gate.outputs[0]];
    for (std::size_t k = first; k < u.cores.size(); ++k) {
      const GifCore& core = u.cores[k];
      const auto ci = static_cast<std::uint32_t>(k);
      for (unsigned go : core.gos) {
        if (opt.model == GifModel::GO) {
          switch (opt.mode) {
            case GifMode::Site: u.items.push_back({ci, go, -1, !core.fault.value}); break;
            case GifMode::Path:
              u.items.push_back({ci, go, -1, false});
              u.items.push_back({ci, go, -1, true});
              break;
            case GifMode::Kmap: u.items.push_back({ci, go, -1, kmap_value(c, core, go)}); break;
          }
          continue;
        }
        for (std::uint32_t j : reach[out[go]]) {
          u.items.push_back({ci, go, static_cast<std::int32_t>(j), false});
          u.items.push_back({ci, go, static_cast<std::int32_t>(j), true});
        }
      }
    }
  }
  return u;
}

FrameSet rtl_frames(const Circuit& c, const VectorProgram& p) {
  const Trace t = simulate(c, p);
  const auto ins = c.input_ports();
  std::size_t nsrc = c.controllable_bits();
  FrameSet fs(nsrc);
  std::vector<bool> bits;
  for (const auto& cyc : t.cycles) {
    bits.clear();
    for (std::size_t k = 0; k < ins.size(); ++k)
      for (unsigned b = 0; b < c.width(c.ports()[ins[k]].net); ++b) bits.push_back((cyc.inputs[k] >> b) & 1);
    for (std::size_t r = 0; r < c.registers().size(); ++r)
      for (unsigned b = 0; b < c.width(c.registers()[r].q); ++b) bits.push_back((cyc.state[r] >> b) & 1);
    fs.push(bits);
  }
  return fs;
}

// ---------------------------------------------------------------------------

struct GifSimulator::Impl {
  struct GateModel {
    GateId gate = 0;
    GateCircuit tmpl;
    std::vector<BitId> gin;   // global bits feeding the template inputs
    std::vector<BitId> gout;  // global output bits
    std::vector<std::uint32_t> cores;
    std::unique_ptr<FaultEvaluator> fe;
  };

  const GifUniverse& u;
  GateCircuit gc;
  std::vector<BitId> src;
  std::vector<GateModel> models;
  std::vector<std::vector<std::uint32_t>> core_items;
  std::unique_ptr<FaultEvaluator> fe;
  std::vector<std::uint64_t> good, tv, diff, open_items;

  Impl(const Circuit& c, const GifUniverse& uni) : u(uni) {
    if (universe_hash(c, u.options) != u.hash) throw std::invalid_argument("GIF universe does not match the circuit");
    std::vector<Bits> bits;
    gc = expand(c, ExpandOptions{Decomp::A, false}, &bits);
    src = gc.sources();
    fe = std::make_unique<FaultEvaluator>(gc);
    good.assign(gc.nets().size(), 0);
    core_items.resize(u.cores.size());
    for (std::uint32_t k = 0; k < u.items.size(); ++k) core_items[u.items[k].core].push_back(k);
    std::map<GateId, std::size_t> model_of;
    for (std::uint32_t k = 0; k < u.cores.size(); ++k) {
      GateId g = u.cores[k].gate;
      auto [it, fresh] = model_of.emplace(g, models.size());
      if (fresh) {
        GateModel m;
        m.gate = g;
        m.tmpl = build_template(c, g, Decomp::A);
        for (NetId n : c.gates()[g].inputs) m.gin.insert(m.gin.end(), bits[n].begin(), bits[n].end());
        m.gout = bits[c.gates()[g].outputs[0]];
        std::vector<BitId> seen = m.gout;
        std::sort(seen.begin(), seen.end());
        if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
          throw std::logic_error("gate output bits share a net");
        for (BitId b : m.gout)
          if (gc.nets()[b].source == BitSource::Input || gc.nets()[b].source == BitSource::RegQ ||
              std::find(m.gin.begin(), m.gin.end(), b) != m.gin.end())
            throw std::logic_error("gate output bit is wired to a source");
        models.push_back(std::move(m));
      }
      models[it->second].cores.push_back(k);
    }
    for (auto& m : models) m.fe = std::make_unique<FaultEvaluator>(m.tmpl);
  }

  void core_diff(GateModel& m, const GifCore& core) {
    const auto& t = m.tmpl;
    diff.assign(m.gout.size(), 0);
    switch (u.options.mode) {
      case GifMode::Site:
        m.fe->run(tv, core.fault);
        for (unsigned b : core.gos) diff[b] = m.fe->sink_value(b) ^ tv[t.sinks()[b].net];
        break;
      case GifMode::Path: {
        std::uint64_t s = ~std::uint64_t{0};
        for (const auto& [k, pin] : core.path) {
          const auto& gt = t.gates()[k];
          switch (gt.kind) {
            case SimpleKind::And2: s &= tv[gt.in[1 - pin]]; break;
            case SimpleKind::Or2: s &= ~tv[gt.in[1 - pin]]; break;
            case SimpleKind::Mux2:
              if (pin == 0) s &= tv[gt.in[1]] ^ tv[gt.in[2]];
              else if (pin == 1) s &= ~tv[gt.in[0]];
              else s &= tv[gt.in[0]];
              break;
            default: break;
          }
        }
        diff[core.gos[0]] = s;
        break;
      }
      case GifMode::Kmap: {
        std::uint64_t s = ~std::uint64_t{0};
        for (std::size_t k = 0; k < t.inputs().size(); ++k)
          s &= ((core.minterm >> k) & 1) ? tv[t.inputs()[k]] : ~tv[t.inputs()[k]];
        diff[core.gos[0]] = s;
        break;
      }
    }
  }

  void run_batch(const std::vector<std::uint64_t>& words, std::uint64_t lanes, Bitset& covered,
                 std::vector<std::int64_t>* witness, std::int64_t base) {
    for (std::size_t k = 0; k < src.size(); ++k) good[src[k]] = words[k];
    gc.eval(good);
    const std::size_t nsinks = gc.sinks().size();
    std::map<std::vector<std::uint64_t>, std::vector<std::uint64_t>> cache;
    std::vector<std::uint32_t> open;
    for (auto& m : models) {
      bool any = false;
      for (std::uint32_t c : m.cores) {
        for (std::uint32_t it : core_items[c])
          if (!covered.test(it)) {
            any = true;
            break;
          }
        if (any) break;
      }
      if (!any) continue;
      tv.assign(m.tmpl.nets().size(), 0);
      for (std::size_t k = 0; k < m.gin.size(); ++k) tv[m.tmpl.inputs()[k]] = good[m.gin[k]];
      m.tmpl.eval(tv);
      cache.clear();
      for (std::uint32_t c : m.cores) {
        open.clear();
        for (std::uint32_t it : core_items[c])
          if (!covered.test(it)) open.push_back(it);
        if (open.empty()) continue;
        const GifCore& core = u.cores[c];
        core_diff(m, core);
        bool active = false;
        for (auto& d : diff) active |= (d &= lanes) != 0;
        if (!active) continue;
        const std::vector<std::uint64_t>* sink_diff = nullptr;
        for (std::uint32_t it : open) {
          const GifItem& item = u.items[it];
          std::uint64_t mask = diff[item.go];
          if (!mask) continue;
          if (item.j < 0) {
            if (u.options.mode == GifMode::Path) mask &= item.alpha ? good[m.gout[item.go]] : ~good[m.gout[item.go]];
          } else {
            if (!sink_diff) {
              std::vector<std::uint64_t> key;
              std::vector<std::pair<BitId, std::uint64_t>> forced;
              for (std::size_t b = 0; b < diff.size(); ++b)
                if (diff[b]) {
                  key.push_back(b);
                  key.push_back(diff[b]);
                  forced.emplace_back(m.gout[b], good[m.gout[b]] ^ diff[b]);
                }
              auto [pos, fresh] = cache.try_emplace(std::move(key));
              if (fresh) {
                fe->run_forced(good, forced);
                pos->second.assign(nsinks, 0);
                for (std::uint32_t s : fe->touched_sinks()) pos->second[s] = fe->sink_diff(s);
              }
              sink_diff = &pos->second;
            }
            const auto j = static_cast<std::size_t>(item.j);
            const std::uint64_t gj = good[gc.sinks()[j].net];
            mask &= (*sink_diff)[j] & (item.alpha ? gj : ~gj);
          }
          if (!mask) continue;
          covered.set(it);
          if (witness) (*witness)[it] = base + std::countr_zero(mask);
        }
      }
    }
  }
};

GifSimulator::GifSimulator(const Circuit& c, const GifUniverse& u) : impl_(std::make_unique<Impl>(c, u)) {}
GifSimulator::~GifSimulator() = default;

const GateCircuit& GifSimulator::netlist() const { return impl_->gc; }

void GifSimulator::run_batch(const std::vector<std::uint64_t>& sources, std::uint64_t lanes, Bitset& covered,
                             std::vector<std::int64_t>* witness, std::int64_t base) {
  impl_->run_batch(sources, lanes, covered, witness, base);
}

void GifSimulator::run(const FrameSet& frames, Bitset& covered, std::vector<std::int64_t>* witness,
                       std::int64_t base) {
  if (frames.sources() != impl_->src.size()) throw std::invalid_argument("frame width does not match the circuit");
  for (std::size_t b = 0; b < frames.batches(); ++b)
    impl_->run_batch(frames.batch(b), frames.lane_mask(b), covered, witness,
                     base + static_cast<std::int64_t>(b * 64));
}

std::vector<CoverageSet> gif_fault_sim(const Circuit& c, const std::vector<VectorProgram>& tests,
                                       const GifUniverse& u) {
  GifSimulator sim(c, u);
  std::vector<CoverageSet> out;
  for (const auto& p : tests) {
    CoverageSet cs{u.hash, p.name, p.cycles.size(), Bitset(u.size())};
    sim.run(rtl_frames(c, p), cs.covered);
    out.push_back(std::move(cs));
  }
  return out;
}

std::vector<UncoveredItem> uncovered(const GifUniverse& u, const Bitset& covered) {
  if (covered.size() != u.size()) throw std::invalid_argument("coverage does not match the universe");
  std::vector<UncoveredItem> out;
  for (std::size_t k = 0; k < u.size(); ++k)
    if (!covered.test(k)) out.push_back({k, u.item_string(k), u.item_path(k), u.gates[u.core_of(k).gate].kind});
  return out;
}

std::vector<UncoveredItem> uncovered(const GifUniverse& u, const CoverageSet& cov) {
  if (cov.universe_hash != u.hash) throw std::invalid_argument("coverage belongs to a different universe");
  return uncovered(u, cov.covered);
}

std::string_view coverability_name(Coverability c) {
  switch (c) {
    case Coverability::Coverable: return "coverable";
    case Coverability::Uncoverable: return "uncoverable";
    case Coverability::Unclassified: return "unclassified";
  }
  return "?";
}

std::size_t GifClassification::count(Coverability c) const {
  return static_cast<std::size_t>(std::count(status.begin(), status.end(), c));
}

GifClassification classify_coverable(const Circuit& c, const GifUniverse& u, unsigned max_bits) {
  GifClassification out;
  const unsigned bits = c.controllable_bits();
  if (bits > max_bits) {
    out.status.assign(u.size(), Coverability::Unclassified);
    out.witness.assign(u.size(), -1);
    return out;
  }
  GifSimulator sim(c, u);
  Bitset covered(u.size());
  std::vector<std::int64_t> idx(u.size(), -1);
  const std::uint64_t total = std::uint64_t{1} << bits;
  const std::size_t nb = static_cast<std::size_t>((total + 63) / 64);
  for (std::size_t b = 0; b < nb; ++b) {
    const std::uint64_t n = std::min<std::uint64_t>(64, total - b * 64);
    const std::uint64_t lanes = n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
    sim.run_batch(exhaustive_batch(b, bits), lanes, covered, &idx, static_cast<std::int64_t>(b * 64));
    if (covered.all()) break;
  }
  out.status.resize(u.size());
  out.witness.assign(u.size(), -1);
  for (std::size_t k = 0; k < u.size(); ++k) {
    out.status[k] = covered.test(k) ? Coverability::Coverable : Coverability::Uncoverable;
    if (idx[k] >= 0) out.witness[k] = static_cast<std::int64_t>(scramble(static_cast<std::uint64_t>(idx[k]), bits));
  }
  return out;
}

Coverability classify_item(const Circuit& c, const GifUniverse& u, std::size_t item, unsigned max_bits) {
  return classify_coverable(c, u, max_bits).status.at(item);
}

CoverableCoverage coverable_coverage(const GifClassification& cls, const Bitset& covered) {
  CoverableCoverage r;
  for (std::size_t k = 0; k < cls.status.size(); ++k)
    if (cls.status[k] == Coverability::Coverable) {
      ++r.coverable;
      r.covered += covered.test(k);
    }
  return r;
}

}  // namespace hypertest

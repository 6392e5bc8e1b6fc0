#include "hypertest/sim.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "hypertest/text_util.hpp"

namespace hypertest {

VectorProgram parse_vectors(std::string_view text, std::string name) {
  VectorProgram p;
  p.name = std::move(name);
  std::vector<Diagnostic> diags;
  int lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    std::string line = strip_comment(raw);
    if (trim(line).empty()) continue;
    VectorCycle cyc;
    cyc.line = lineno;
    auto* target = &cyc.set;
    bool first = true;
    for (const auto& tok : tokenize(line)) {
      if (tok.text == ";") continue;
      if (tok.text == "set" && first) {
        first = false;
        continue;
      }
      first = false;
      if (tok.text == "expect") {
        target = &cyc.expect;
        continue;
      }
      std::string t = tok.text;
      if (!t.empty() && t.back() == ';') t.pop_back();
      if (t.empty()) continue;
      auto [k, v] = split_kv(t);
      auto val = parse_number(v);
      if (!is_identifier(k) || !val) {
        diags.push_back({lineno, tok.col, "malformed assignment '" + tok.text + "'"});
        continue;
      }
      target->emplace_back(k, *val);
    }
    p.cycles.push_back(std::move(cyc));
  }
  if (!diags.empty()) throw DiagnosticError(std::move(diags));
  return p;
}

VectorProgram load_vectors(const std::string& path) {
  return parse_vectors(read_file(path), std::filesystem::path(path).stem().string());
}

std::string print_vectors(const VectorProgram& p) {
  std::ostringstream os;
  for (const auto& cyc : p.cycles) {
    os << "set";
    for (const auto& [k, v] : cyc.set) os << ' ' << k << '=' << hex(v);
    if (!cyc.expect.empty()) {
      os << " ; expect";
      for (const auto& [k, v] : cyc.expect) os << ' ' << k << '=' << hex(v);
    }
    os << '\n';
  }
  return os.str();
}

std::vector<VectorProgram> load_vector_dir(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".vec") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  std::vector<VectorProgram> out;
  for (const auto& f : files) out.push_back(load_vectors(f));
  return out;
}

namespace {

std::size_t port_slot(const Circuit& c, const std::vector<std::uint32_t>& ports, const std::string& name) {
  for (std::size_t i = 0; i < ports.size(); ++i)
    if (c.ports()[ports[i]].name == name) return i;
  return ports.size();
}

}  // namespace

std::vector<std::vector<std::uint64_t>> resolve_inputs(const Circuit& c, const VectorProgram& p) {
  const auto ins = c.input_ports();
  const auto outs = c.output_ports();
  std::vector<Diagnostic> diags;
  std::vector<std::vector<std::uint64_t>> out;
  std::vector<std::uint64_t> cur(ins.size(), 0);
  for (const auto& cyc : p.cycles) {
    for (const auto& [name, v] : cyc.set) {
      std::size_t k = port_slot(c, ins, name);
      if (k == ins.size()) {
        diags.push_back({cyc.line, 0, "unknown input '" + name + "'"});
        continue;
      }
      if (v & ~width_mask(c.width(c.ports()[ins[k]].net)))
        diags.push_back({cyc.line, 0, "value " + hex(v) + " too wide for '" + name + "'"});
      cur[k] = v;
    }
    for (const auto& [name, v] : cyc.expect)
      if (port_slot(c, outs, name) == outs.size()) diags.push_back({cyc.line, 0, "unknown output '" + name + "'"});
    out.push_back(cur);
  }
  if (!diags.empty()) throw DiagnosticError(std::move(diags));
  return out;
}

// ---------------------------------------------------------------------------

Evaluator::Evaluator(const Circuit& c)
    : c_(c),
      order_(levelize(c).order),
      in_ports_(c.input_ports()),
      out_ports_(c.output_ports()),
      values_(c.nets().size(), 0) {
  widths_.resize(c.gates().size());
  std::size_t maxin = 0;
  for (GateId g = 0; g < c.gates().size(); ++g) {
    for (NetId n : c.gates()[g].inputs) widths_[g].push_back(c.width(n));
    maxin = std::max(maxin, c.gates()[g].inputs.size());
  }
  scratch_.reserve(maxin);
}

void Evaluator::load_sources(const std::vector<std::uint64_t>& inputs, const std::vector<std::uint64_t>& regs) {
  for (std::size_t i = 0; i < in_ports_.size(); ++i) values_[c_.ports()[in_ports_[i]].net] = inputs[i];
  for (std::size_t r = 0; r < c_.registers().size(); ++r) values_[c_.registers()[r].q] = regs[r];
}

std::uint64_t Evaluator::eval_one(GateId g) {
  const auto& gi = c_.gates()[g];
  scratch_.clear();
  for (NetId n : gi.inputs) scratch_.push_back(values_[n]);
  std::uint64_t v = eval_primitive(gi.kind, gi.params, widths_[g], c_.width(gi.outputs[0]), scratch_);
  values_[gi.outputs[0]] = v;
  return v;
}

void Evaluator::eval_gates(const std::vector<GateId>& gates) {
  for (GateId g : gates) eval_one(g);
}

void Evaluator::eval(const std::vector<std::uint64_t>& inputs, const std::vector<std::uint64_t>& regs) {
  load_sources(inputs, regs);
  eval_gates(order_);
}

std::vector<std::uint64_t> Evaluator::outputs() const {
  std::vector<std::uint64_t> out;
  for (auto p : out_ports_) out.push_back(values_[c_.ports()[p].net]);
  return out;
}

std::vector<std::uint64_t> Evaluator::next_state() const {
  std::vector<std::uint64_t> out;
  for (const auto& r : c_.registers()) out.push_back(values_[r.d]);
  return out;
}

std::vector<std::uint64_t> initial_state(const Circuit& c) {
  std::vector<std::uint64_t> s;
  for (const auto& r : c.registers()) s.push_back(r.init);
  return s;
}

StepResult step_macro_cycle(const Circuit& c, const std::vector<std::uint64_t>& state,
                            const std::vector<std::uint64_t>& inputs) {
  Evaluator ev(c);
  ev.eval(inputs, state);
  return {ev.next_state(), ev.outputs()};
}

Trace simulate_from(const Circuit& c, const VectorProgram& p, std::vector<std::uint64_t> state) {
  const auto inputs = resolve_inputs(c, p);
  const auto outs = c.output_ports();
  Evaluator ev(c);
  Trace t;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    ev.eval(inputs[k], state);
    TraceCycle tc{inputs[k], ev.outputs(), state};
    for (const auto& [name, want] : p.cycles[k].expect) {
      std::size_t slot = port_slot(c, outs, name);
      if (tc.outputs[slot] != want) t.mismatches.push_back({k, name, want, tc.outputs[slot]});
    }
    state = ev.next_state();
    t.cycles.push_back(std::move(tc));
  }
  t.final_state = std::move(state);
  return t;
}

Trace simulate(const Circuit& c, const VectorProgram& p) { return simulate_from(c, p, initial_state(c)); }

std::string print_trace(const Circuit& c, const Trace& t) {
  std::ostringstream os;
  const auto ins = c.input_ports();
  const auto outs = c.output_ports();
  for (std::size_t k = 0; k < t.cycles.size(); ++k) {
    const auto& cy = t.cycles[k];
    os << "cycle " << k;
    for (std::size_t i = 0; i < ins.size(); ++i) os << ' ' << c.ports()[ins[i]].name << '=' << hex(cy.inputs[i]);
    os << " |";
    for (std::size_t i = 0; i < outs.size(); ++i)
      os << ' ' << c.ports()[outs[i]].name << '=' << hex(cy.outputs[i]);
    os << " |";
    for (std::size_t r = 0; r < cy.state.size(); ++r) os << ' ' << c.registers()[r].name << '=' << hex(cy.state[r]);
    os << '\n';
  }
  os << "final";
  for (std::size_t r = 0; r < t.final_state.size(); ++r)
    os << ' ' << c.registers()[r].name << '=' << hex(t.final_state[r]);
  os << '\n';
  for (const auto& m : t.mismatches)
    os << "mismatch cycle=" << m.cycle << ' ' << m.output << " expected=" << hex(m.expected)
       << " actual=" << hex(m.actual) << '\n';
  return os.str();
}

}  // namespace hypertest

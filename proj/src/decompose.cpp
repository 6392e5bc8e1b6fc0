#include "hypertest/decompose.hpp"

#include <map>
#include <stdexcept>

namespace hypertest {

std::string_view decomp_name(Decomp d) { return d == Decomp::A ? "A" : "B"; }

Decomp decomp_from_name(std::string_view s) {
  if (s == "A" || s == "a") return Decomp::A;
  if (s == "B" || s == "b") return Decomp::B;
  throw std::invalid_argument("unknown decomposition '" + std::string(s) + "'");
}

BitId TemplateEmitter::op(SimpleKind k, BitId a, BitId b, BitId c) {
  std::uint32_t site = site_++;
  return gc_.add_gate(k, {a, b, c}, prefix_ + "." + std::to_string(site), source_, site, copy_);
}

BitId TemplateEmitter::tie(bool v) {
  BitId& t = tie_[v ? 1 : 0];
  if (t == ~0u) t = gc_.tie(v, prefix_ + (v ? ".tie1" : ".tie0"));
  return t;
}

BitId TemplateEmitter::bit_tie(bool v, unsigned bit) {
  return gc_.tie(v, prefix_ + ".k" + std::to_string(bit));
}

namespace {

using K = SimpleKind;

BitId chain(TemplateEmitter& e, K k, const Bits& xs) {
  BitId acc = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) acc = e.op(k, acc, xs[i]);
  return acc;
}

BitId tree(TemplateEmitter& e, K k, Bits xs) {
  while (xs.size() > 1) {
    Bits next;
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2) next.push_back(e.op(k, xs[i], xs[i + 1]));
    if (xs.size() % 2) next.push_back(xs.back());
    xs = std::move(next);
  }
  return xs[0];
}

struct SumCarry {
  BitId s, c;
};

SumCarry full_add(TemplateEmitter& e, BitId a, BitId b, BitId c) {
  BitId p = e.XOR(a, b);
  BitId s = e.XOR(p, c);
  BitId g = e.AND(a, b);
  BitId t = e.AND(p, c);
  return {s, e.OR(g, t)};
}

// Ripple adder over equal-width operands. With `need_carry` false the last
// stage computes only its sum bit.
Bits ripple_add(TemplateEmitter& e, const Bits& a, const Bits& b, BitId cin, bool need_carry,
                BitId* cout = nullptr) {
  Bits s(a.size());
  BitId c = cin;
  for (std::size_t i = 0; i < a.size(); ++i) {
    bool last = i + 1 == a.size();
    if (last && !need_carry) {
      s[i] = e.XOR(e.XOR(a[i], b[i]), c);
    } else {
      auto fa = full_add(e, a[i], b[i], c);
      s[i] = fa.s;
      c = fa.c;
    }
  }
  if (cout) *cout = c;
  return s;
}

// Adder without a carry input: half adder at bit 0. Used by B forms.
Bits ripple_add_nocin(TemplateEmitter& e, const Bits& a, const Bits& b, bool need_carry,
                      BitId* cout = nullptr) {
  Bits s(a.size());
  if (a.size() == 1 && !need_carry) {
    s[0] = e.XOR(a[0], b[0]);
    return s;
  }
  s[0] = e.XOR(a[0], b[0]);
  BitId c = e.AND(a[0], b[0]);
  for (std::size_t i = 1; i < a.size(); ++i) {
    bool last = i + 1 == a.size();
    if (last && !need_carry) {
      s[i] = e.XOR(e.XOR(a[i], b[i]), c);
    } else {
      auto fa = full_add(e, a[i], b[i], c);
      s[i] = fa.s;
      c = fa.c;
    }
  }
  if (cout) *cout = c;
  return s;
}

Bits add_a(TemplateEmitter& e, const Bits& a, const Bits& b) {
  BitId cout;
  return ripple_add(e, a, b, e.tie(false), true, &cout);
}

Bits add_b(TemplateEmitter& e, const Bits& a, const Bits& b) {
  const std::size_t w = a.size();
  if (w == 1) return {e.XOR(a[0], b[0])};
  const std::size_t lo = (w + 1) / 2;
  Bits alo(a.begin(), a.begin() + lo), blo(b.begin(), b.begin() + lo);
  BitId clo;
  Bits out = ripple_add_nocin(e, alo, blo, true, &clo);
  // high half computed for carry-in 0 and 1, then selected
  Bits s0, s1;
  BitId c0 = 0, c1 = 0;
  for (std::size_t i = lo; i < w; ++i) {
    bool last = i + 1 == w;
    if (i == lo) {
      BitId p = e.XOR(a[i], b[i]);
      s0.push_back(p);
      s1.push_back(e.NOT(p));
      if (!last) {
        c0 = e.AND(a[i], b[i]);
        c1 = e.OR(a[i], b[i]);
      }
      continue;
    }
    BitId p = e.XOR(a[i], b[i]);
    s0.push_back(e.XOR(p, c0));
    s1.push_back(e.XOR(p, c1));
    if (!last) {
      BitId g = e.AND(a[i], b[i]);
      c0 = e.OR(g, e.AND(p, c0));
      c1 = e.OR(g, e.AND(p, c1));
    }
  }
  for (std::size_t i = 0; i < s0.size(); ++i) out.push_back(e.MUX(clo, s0[i], s1[i]));
  return out;
}

Bits sub_a(TemplateEmitter& e, const Bits& a, const Bits& b) {
  Bits d(a.size());
  BitId bin = e.tie(false);
  for (std::size_t i = 0; i < a.size(); ++i) {
    BitId x = e.XOR(a[i], b[i]);
    d[i] = e.XOR(x, bin);
    if (i + 1 == a.size()) break;
    BitId t1 = e.AND(e.NOT(a[i]), b[i]);
    BitId t2 = e.AND(e.NOT(x), bin);
    bin = e.OR(t1, t2);
  }
  return d;
}

Bits sub_b(TemplateEmitter& e, const Bits& a, const Bits& b) {
  Bits nb;
  for (BitId x : b) nb.push_back(e.NOT(x));
  return ripple_add(e, a, nb, e.tie(true), false);
}

Bits mul_a(TemplateEmitter& e, const Bits& a, const Bits& b) {
  const std::size_t w = a.size();
  Bits acc(w);
  for (std::size_t j = 0; j < w; ++j) acc[j] = e.AND(a[j], b[0]);
  for (std::size_t i = 1; i < w; ++i) {
    BitId c = 0;
    for (std::size_t j = i; j < w; ++j) {
      BitId pp = e.AND(a[j - i], b[i]);
      bool last = j + 1 == w;
      if (j == i) {
        BitId s = e.XOR(acc[j], pp);
        if (!last) c = e.AND(acc[j], pp);
        acc[j] = s;
      } else if (last) {
        acc[j] = e.XOR(e.XOR(acc[j], pp), c);
      } else {
        auto fa = full_add(e, acc[j], pp, c);
        acc[j] = fa.s;
        c = fa.c;
      }
    }
  }
  return acc;
}

Bits mul_b(TemplateEmitter& e, const Bits& a, const Bits& b) {
  const std::size_t w = a.size();
  // partial-product rows gated by muxes, accumulated from the top row down
  std::vector<Bits> rows(w);
  for (std::size_t i = 0; i < w; ++i)
    for (std::size_t j = i; j < w; ++j) rows[i].push_back(e.MUX(b[i], e.tie(false), a[j - i]));
  Bits acc = rows[w - 1];  // covers bit w-1 only
  for (std::size_t i = w - 1; i-- > 0;) {
    // rows[i] covers bits i..w-1; acc covers bits i+1..w-1
    Bits hi_row(rows[i].begin() + 1, rows[i].end());
    Bits sum = ripple_add_nocin(e, hi_row, acc, false);
    Bits next{rows[i][0]};
    next.insert(next.end(), sum.begin(), sum.end());
    acc = std::move(next);
  }
  return acc;
}

BitId eq_a(TemplateEmitter& e, const Bits& a, const Bits& b) {
  Bits x;
  for (std::size_t i = 0; i < a.size(); ++i) x.push_back(e.XOR(a[i], b[i]));
  return e.NOT(chain(e, K::Or2, x));
}

BitId eq_b(TemplateEmitter& e, const Bits& a, const Bits& b) {
  Bits x;
  for (std::size_t i = 0; i < a.size(); ++i) x.push_back(e.XOR(e.NOT(a[i]), b[i]));
  return tree(e, K::And2, x);
}

BitId lt_a(TemplateEmitter& e, const Bits& a, const Bits& b) {
  BitId lt = e.AND(e.NOT(a[0]), b[0]);
  for (std::size_t i = 1; i < a.size(); ++i) {
    BitId here = e.AND(e.NOT(a[i]), b[i]);
    BitId same = e.NOT(e.XOR(a[i], b[i]));
    lt = e.OR(here, e.AND(same, lt));
  }
  return lt;
}

BitId lt_b(TemplateEmitter& e, const Bits& a, const Bits& b) {
  BitId r = e.AND(e.NOT(a[0]), b[0]);
  for (std::size_t i = 1; i < a.size(); ++i) r = e.MUX(e.XOR(a[i], b[i]), r, b[i]);
  return r;
}

Bits shift(TemplateEmitter& e, const Bits& a, const Bits& s, bool left, bool reversed) {
  const std::size_t w = a.size();
  Bits x = a;
  auto stage = [&](std::size_t t) {
    Bits nx(w);
    std::uint64_t amount = t >= 63 ? ~std::uint64_t{0} : (std::uint64_t{1} << t);
    for (std::size_t j = 0; j < w; ++j) {
      BitId shifted;
      if (amount >= w) shifted = e.tie(false);
      else if (left) shifted = j >= amount ? x[j - amount] : e.tie(false);
      else shifted = j + amount < w ? x[j + amount] : e.tie(false);
      nx[j] = e.MUX(s[t], x[j], shifted);
    }
    x = std::move(nx);
  };
  if (reversed)
    for (std::size_t t = s.size(); t-- > 0;) stage(t);
  else
    for (std::size_t t = 0; t < s.size(); ++t) stage(t);
  return x;
}

Bits case_a(TemplateEmitter& e, const GateParams& p, const std::vector<Bits>& ins, unsigned w) {
  const Bits& sel = ins[0];
  Bits nsel(sel.size(), ~0u);
  auto lit = [&](std::size_t b, bool one) {
    if (one) return sel[b];
    if (nsel[b] == ~0u) nsel[b] = e.NOT(sel[b]);
    return nsel[b];
  };
  Bits y = ins.back();
  for (std::size_t i = p.arms.size(); i-- > 0;) {
    Bits lits;
    for (std::size_t b = 0; b < sel.size(); ++b) lits.push_back(lit(b, (p.arms[i] >> b) & 1));
    BitId m = chain(e, K::And2, lits);
    for (unsigned j = 0; j < w; ++j) y[j] = e.MUX(m, y[j], ins[1 + i][j]);
  }
  return y;
}

Bits case_b(TemplateEmitter& e, const GateParams& p, const std::vector<Bits>& ins, unsigned w) {
  const Bits& sel = ins[0];
  Bits nsel(sel.size(), ~0u);
  auto mis = [&](std::size_t b, bool one) {
    if (!one) return sel[b];
    if (nsel[b] == ~0u) nsel[b] = e.NOT(sel[b]);
    return nsel[b];
  };
  Bits m;
  for (std::size_t i = 0; i < p.arms.size(); ++i) {
    Bits ms;
    for (std::size_t b = 0; b < sel.size(); ++b) ms.push_back(mis(b, (p.arms[i] >> b) & 1));
    m.push_back(e.NOT(chain(e, K::Or2, ms)));
  }
  BitId none = e.NOT(tree(e, K::Or2, m));
  Bits y(w);
  for (unsigned j = 0; j < w; ++j) {
    Bits terms;
    for (std::size_t i = 0; i < m.size(); ++i) terms.push_back(e.AND(ins[1 + i][j], m[i]));
    terms.push_back(e.AND(ins.back()[j], none));
    y[j] = chain(e, K::Or2, terms);
  }
  return y;
}

}  // namespace

Bits emit_primitive(TemplateEmitter& e, GateKind kind, const GateParams& params,
                    const std::vector<Bits>& ins, unsigned out_width, Decomp d) {
  const bool A = d == Decomp::A;
  Bits out(out_width);
  switch (kind) {
    case GateKind::Not:
      for (unsigned j = 0; j < out_width; ++j) out[j] = e.NOT(ins[0][j]);
      return out;
    case GateKind::And:
    case GateKind::Or:
    case GateKind::Xor: {
      K k = kind == GateKind::And ? K::And2 : kind == GateKind::Or ? K::Or2 : K::Xor2;
      for (unsigned j = 0; j < out_width; ++j) {
        Bits xs;
        for (const auto& in : ins) xs.push_back(in[j]);
        out[j] = A ? chain(e, k, xs) : tree(e, k, xs);
      }
      return out;
    }
    case GateKind::Mux2: {
      if (A) {
        for (unsigned j = 0; j < out_width; ++j) out[j] = e.MUX(ins[0][0], ins[1][j], ins[2][j]);
        return out;
      }
      BitId ns = e.NOT(ins[0][0]);
      for (unsigned j = 0; j < out_width; ++j)
        out[j] = e.OR(e.AND(ins[1][j], ns), e.AND(ins[2][j], ins[0][0]));
      return out;
    }
    case GateKind::Eq:
      return {A ? eq_a(e, ins[0], ins[1]) : eq_b(e, ins[0], ins[1])};
    case GateKind::Neq: {
      Bits x;
      for (std::size_t i = 0; i < ins[0].size(); ++i) x.push_back(e.XOR(ins[0][i], ins[1][i]));
      return {A ? chain(e, K::Or2, x) : tree(e, K::Or2, x)};
    }
    case GateKind::Lt:
      return {A ? lt_a(e, ins[0], ins[1]) : lt_b(e, ins[0], ins[1])};
    case GateKind::Add:
      return A ? add_a(e, ins[0], ins[1]) : add_b(e, ins[0], ins[1]);
    case GateKind::Sub:
      return A ? sub_a(e, ins[0], ins[1]) : sub_b(e, ins[0], ins[1]);
    case GateKind::Mul:
      return A ? mul_a(e, ins[0], ins[1]) : mul_b(e, ins[0], ins[1]);
    case GateKind::Shl:
    case GateKind::Shr:
      return shift(e, ins[0], ins[1], kind == GateKind::Shl, !A);
    case GateKind::Case:
      return A ? case_a(e, params, ins, out_width) : case_b(e, params, ins, out_width);
    case GateKind::Const:
      for (unsigned j = 0; j < out_width; ++j) out[j] = e.bit_tie((params.value >> j) & 1, j);
      return out;
    case GateKind::Slice:
      for (unsigned j = 0; j < out_width; ++j) out[j] = ins[0][params.lo + j];
      return out;
    case GateKind::Concat: {
      out.clear();
      for (std::size_t i = ins.size(); i-- > 0;) out.insert(out.end(), ins[i].begin(), ins[i].end());
      out.resize(out_width);
      return out;
    }
  }
  throw std::logic_error("emit_primitive: bad kind");
}

GateCircuit build_template(GateKind kind, const GateParams& params,
                           const std::vector<unsigned>& in_widths, unsigned out_width, Decomp d) {
  GateCircuit gc;
  std::vector<Bits> ins;
  for (std::size_t p = 0; p < in_widths.size(); ++p) {
    Bits b;
    for (unsigned i = 0; i < in_widths[p]; ++i)
      b.push_back(gc.add_input("in" + std::to_string(p) + "[" + std::to_string(i) + "]"));
    gc.set_port("in" + std::to_string(p), b, true);
    ins.push_back(std::move(b));
  }
  TemplateEmitter e(gc, "g", 0, 0);
  Bits out = emit_primitive(e, kind, params, ins, out_width, d);
  for (unsigned j = 0; j < out_width; ++j)
    gc.add_sink(out[j], SinkKind::Output, "out[" + std::to_string(j) + "]");
  gc.set_port("out", out, false);
  gc.finalize();
  return gc;
}

GateCircuit build_template(const Circuit& c, GateId g, Decomp d) {
  const auto& gi = c.gates()[g];
  std::vector<unsigned> w;
  for (NetId n : gi.inputs) w.push_back(c.width(n));
  return build_template(gi.kind, gi.params, w, c.width(gi.outputs[0]), d);
}

namespace {

std::string bit_name(const std::string& net, unsigned b) { return net + "[" + std::to_string(b) + "]"; }

// Consumer keys: gate index >= 0, output port -1, register r -(2 + r).
using Consumer = std::int64_t;

}  // namespace

GateCircuit expand(const Circuit& c, const ExpandOptions& opt, std::vector<Bits>* bits_out) {
  GateCircuit gc;
  const std::size_t nn = c.nets().size();
  std::vector<Bits> bits(nn);
  std::vector<std::map<Consumer, Bits>> copies(nn);

  std::vector<std::vector<Consumer>> consumers(nn);
  for (GateId g = 0; g < c.gates().size(); ++g)
    for (NetId n : c.gates()[g].inputs)
      if (consumers[n].empty() || consumers[n].back() != static_cast<Consumer>(g))
        consumers[n].push_back(g);
  for (std::uint32_t p : c.output_ports()) consumers[c.ports()[p].net].push_back(-1);
  for (std::size_t r = 0; r < c.registers().size(); ++r)
    consumers[c.registers()[r].d].push_back(-2 - static_cast<Consumer>(r));

  auto net_bits = [&](NetId n, Consumer who) -> const Bits& {
    if (!copies[n].empty()) return copies[n].at(who);
    return bits[n];
  };

  for (std::uint32_t p : c.input_ports()) {
    const auto& port = c.ports()[p];
    Bits b;
    for (unsigned i = 0; i < c.width(port.net); ++i) b.push_back(gc.add_input(bit_name(port.name, i)));
    gc.set_port(port.name, b, true);
    bits[port.net] = std::move(b);
  }
  for (const auto& r : c.registers()) {
    Bits b;
    for (unsigned i = 0; i < c.width(r.q); ++i) b.push_back(gc.add_net(bit_name(r.name, i), BitSource::RegQ));
    bits[r.q] = std::move(b);
  }

  const auto lv = levelize(c);
  for (GateId g : lv.order) {
    const auto& gi = c.gates()[g];
    NetId out = gi.outputs[0];
    std::vector<Bits> ins;
    for (NetId n : gi.inputs) ins.push_back(net_bits(n, g));
    const auto& cons = consumers[out];
    if (opt.duplicate_shared && cons.size() > 1) {
      for (std::size_t k = 0; k < cons.size(); ++k) {
        std::string prefix = gi.id + "#" + std::to_string(k);
        TemplateEmitter e(gc, prefix, static_cast<std::int32_t>(g), static_cast<std::uint32_t>(k));
        copies[out][cons[k]] = emit_primitive(e, gi.kind, gi.params, ins, c.width(out), opt.decomp);
      }
    } else {
      TemplateEmitter e(gc, gi.id, static_cast<std::int32_t>(g), 0);
      bits[out] = emit_primitive(e, gi.kind, gi.params, ins, c.width(out), opt.decomp);
    }
  }

  for (std::uint32_t p : c.output_ports()) {
    const auto& port = c.ports()[p];
    const Bits& b = net_bits(port.net, -1);
    for (unsigned i = 0; i < b.size(); ++i) gc.add_sink(b[i], SinkKind::Output, bit_name(port.name, i));
    gc.set_port(port.name, b, false);
  }
  for (std::size_t r = 0; r < c.registers().size(); ++r) {
    const auto& reg = c.registers()[r];
    const Bits& d = net_bits(reg.d, -2 - static_cast<Consumer>(r));
    const Bits& q = bits[reg.q];
    for (unsigned i = 0; i < d.size(); ++i) {
      std::uint32_t s = gc.add_sink(d[i], SinkKind::RegD, "d:" + bit_name(reg.name, i));
      gc.add_reg_bit({reg.name, i, q[i], s, ((reg.init >> i) & 1) != 0});
    }
  }
  gc.finalize();
  if (bits_out) *bits_out = std::move(bits);
  return gc;
}

}  // namespace hypertest

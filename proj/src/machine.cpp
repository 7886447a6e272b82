#include "qdl/machine.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <sstream>
#include <unordered_map>

namespace qdl {

std::string PublicEvent::to_line() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::kVerifierWrote: os << "V " << verifier_symbol; break;
    case Kind::kDebatersWrote: os << "D " << p1_symbol << " " << p0_symbol; break;
    case Kind::kOutcome: os << "O " << outcome; break;
    case Kind::kRestart: os << "R"; break;
    case Kind::kHalt: os << "H " << outcome; break;
  }
  return os.str();
}

Symbol VerifierSpec::comm_symbol(const std::string& text) const {
  const auto& alpha = comm_alphabet();
  for (size_t i = 0; i < alpha.size(); ++i)
    if (alpha[i] == text) return static_cast<Symbol>(i);
  return -1;
}

Register initial_register(const VerifierSpec& spec) {
  if (spec.uses_vector_register()) return StateVector::basis(spec.vector_dim(), 0);
  std::vector<RotationTracker> ts(static_cast<size_t>(spec.tracker_count()));
  for (auto& t : ts) t.unit = spec.rotation_unit();
  return ts;
}

MachineConfig initial_config(const VerifierSpec& spec) {
  MachineConfig cfg;
  cfg.state = spec.initial_state();
  cfg.head = 0;
  cfg.reg = initial_register(spec);
  cfg.cell_v = cfg.cell_p1 = cfg.cell_p0 = 0;
  return cfg;
}

char input_symbol_at(const std::string& w, int head) {
  if (head == 0) return kLeftEndmarker;
  if (head == static_cast<int>(w.size()) + 1) return kRightEndmarker;
  if (head < 0 || head > static_cast<int>(w.size()) + 1)
    throw SpecIncompleteError("head position out of tape range");
  return w[static_cast<size_t>(head) - 1];
}

namespace {

int apply_head_move(int head, HeadMove move, const std::string& w, const VerifierSpec& spec,
                    StateId state) {
  int next = head;
  if (move == HeadMove::kLeft) --next;
  if (move == HeadMove::kRight) ++next;
  if (next < 0 || next > static_cast<int>(w.size()) + 1)
    throw SpecIncompleteError("validation defect: delta_s moves the head off the tape in state " +
                              spec.state_name(state));
  return next;
}

Symbol intern_emission(const VerifierSpec& spec, const DebaterStrategy& s, const std::string& text) {
  if (text.empty())
    throw StrategyContractError("strategy '" + s.name() + "' produced no symbol");
  Symbol sym = spec.comm_symbol(text);
  if (sym < 0)
    throw StrategyContractError("strategy '" + s.name() + "' emitted '" + text +
                                "' which is outside the communication alphabet");
  return sym;
}

struct ActionBranch {
  int outcome = 0;
  Prob weight = Prob::one();         // conditional probability of this outcome
  OutcomeAction action = OutcomeAction::kContinue;
  std::string label;
  Register reg;
  bool consult_delta_s = true;
};

std::vector<ActionBranch> quantum_branches(const VerifierSpec& spec, const MachineConfig& cfg,
                                           const QuantumAction& qa, EngineObserver* observer) {
  std::vector<ActionBranch> out;
  if (qa.rotation && qa.rotation->kind == RotationAction::Kind::kFixed) {
    ActionBranch b;
    b.outcome = qa.rotation->fixed_outcome;
    b.reg = cfg.reg;
    if (qa.superop >= 0) {
      const auto& el = spec.superop(qa.superop).elements.at(static_cast<size_t>(b.outcome));
      b.action = el.action;
      b.label = el.label;
    }
    out.push_back(std::move(b));
    return out;
  }
  if (qa.superop >= 0) {
    const Superoperator& op = spec.superop(qa.superop);
    if (!std::holds_alternative<StateVector>(cfg.reg))
      throw SpecIncompleteError("superoperator applied to a rotation register");
    if (observer) observer->on_superop(spec, cfg, op);
    const auto& vec = std::get<StateVector>(cfg.reg);
    Rational norm = vec.squared_norm();
    if (norm.is_zero()) throw SpecIncompleteError("superoperator applied to a zero-norm register");
    for (auto& br : apply_exact(vec, op)) {
      if (br.weight.is_zero()) continue;
      ActionBranch b;
      b.outcome = br.outcome;
      b.weight = Prob(br.weight / norm);
      const auto& el = op.elements[static_cast<size_t>(br.outcome)];
      b.action = el.action;
      b.label = el.label.empty() ? op.label : el.label;
      b.reg = std::move(br.vec);
      out.push_back(std::move(b));
    }
    return out;
  }
  if (!qa.rotation) throw SpecIncompleteError("delta_q produced neither superoperator nor rotation");
  const RotationAction& ra = *qa.rotation;
  auto trackers = [&]() -> const std::vector<RotationTracker>& {
    if (!std::holds_alternative<std::vector<RotationTracker>>(cfg.reg))
      throw SpecIncompleteError("rotation action applied to a vector register");
    return std::get<std::vector<RotationTracker>>(cfg.reg);
  };
  switch (ra.kind) {
    case RotationAction::Kind::kNoop: {
      ActionBranch b;
      b.reg = cfg.reg;
      out.push_back(std::move(b));
      break;
    }
    case RotationAction::Kind::kRotate: {
      auto ts = trackers();
      if (ra.deltas.size() != ts.size())
        throw SpecIncompleteError("rotation delta arity mismatch");
      for (size_t i = 0; i < ts.size(); ++i) {
        long d = ra.deltas[i];
        if (d != 0) ts[i] = rotate(ts[i], d > 0 ? 1 : -1, d > 0 ? d : -d);
      }
      ActionBranch b;
      b.reg = std::move(ts);
      out.push_back(std::move(b));
      break;
    }
    case RotationAction::Kind::kReset: {
      auto ts = trackers();
      ts.at(static_cast<size_t>(ra.tracker)).steps = 0;
      ActionBranch b;
      b.reg = std::move(ts);
      out.push_back(std::move(b));
      break;
    }
    case RotationAction::Kind::kMeasure: {
      auto ts = trackers();
      const auto& t = ts.at(static_cast<size_t>(ra.tracker));
      MpReal p1 = q1_probability(t);
      Prob q1 = t.steps == 0 ? Prob::zero() : Prob(p1);
      Prob q0 = Prob::one() - q1;
      // q0 collapses the qubit back to its start.
      auto ts0 = ts;
      ts0[static_cast<size_t>(ra.tracker)].steps = 0;
      if (!q0.is_zero()) {
        ActionBranch b;
        b.outcome = 0;
        b.weight = q0;
        b.reg = std::move(ts0);
        out.push_back(std::move(b));
      }
      if (!q1.is_zero()) {
        ActionBranch b;
        b.outcome = 1;
        b.weight = q1;
        auto ts1 = ts;
        ts1[static_cast<size_t>(ra.tracker)].steps = 0;
        b.reg = std::move(ts1);
        out.push_back(std::move(b));
      }
      break;
    }
    case RotationAction::Kind::kCoin: {
      if (ra.outcomes < 2) throw SpecIncompleteError("coin needs at least two outcomes");
      for (int i = 0; i < ra.outcomes; ++i) {
        ActionBranch b;
        b.outcome = i;
        b.weight = Prob(Rational(1, ra.outcomes));
        b.reg = cfg.reg;
        out.push_back(std::move(b));
      }
      break;
    }
    case RotationAction::Kind::kFixed:
      break;  // handled above
  }
  return out;
}

}  // namespace

std::vector<ExactSuccessor> step_exact(const VerifierSpec& spec, const std::string& w,
                                       const MachineConfig& cfg, const DebaterStrategy& p1,
                                       const DebaterStrategy& p0, EngineObserver* observer) {
  StateKind kind = spec.state_kind(cfg.state);
  if (kind == StateKind::kAccept || kind == StateKind::kReject)
    throw SpecIncompleteError("step on a halted configuration");
  char sym = input_symbol_at(w, cfg.head);
  std::vector<ExactSuccessor> out;

  if (kind == StateKind::kComm) {
    CommWrite cw = spec.delta_c(cfg.state, sym);
    if (spec.state_kind(cw.next) != StateKind::kRead)
      throw SpecIncompleteError("delta_c must enter a reading state (state " +
                                spec.state_name(cfg.state) + ")");
    ExactSuccessor s;
    s.p1 = p1.clone();
    s.p0 = p0.clone();
    PublicEvent ev1{PublicEvent::Kind::kVerifierWrote, cw.write, -1, -1, -1};
    s.p1->observe(ev1);
    s.p0->observe(ev1);
    Symbol g1 = intern_emission(spec, *s.p1, s.p1->emit());
    Symbol g0 = intern_emission(spec, *s.p0, s.p0->emit());
    PublicEvent ev2{PublicEvent::Kind::kDebatersWrote, -1, g1, g0, -1};
    s.p1->observe(ev2);
    s.p0->observe(ev2);
    s.events = {ev1, ev2};
    s.cfg = cfg;
    s.cfg.state = cw.next;
    s.cfg.cell_v = cw.write;
    s.cfg.cell_p1 = g1;
    s.cfg.cell_p0 = g0;
    out.push_back(std::move(s));
    return out;
  }

  QuantumAction qa = spec.delta_q(cfg.state, sym, cfg.cell_p1, cfg.cell_p0);
  for (auto& b : quantum_branches(spec, cfg, qa, observer)) {
    ExactSuccessor s;
    s.weight = b.weight;
    PublicEvent evo{PublicEvent::Kind::kOutcome, -1, -1, -1, b.outcome};
    switch (b.action) {
      case OutcomeAction::kAccept:
        s.terminal = TerminalKind::kAccept;
        s.label = b.label;
        s.events = {evo, PublicEvent{PublicEvent::Kind::kHalt, -1, -1, -1, 1}};
        break;
      case OutcomeAction::kReject:
        s.terminal = TerminalKind::kReject;
        s.label = b.label;
        s.events = {evo, PublicEvent{PublicEvent::Kind::kHalt, -1, -1, -1, 0}};
        break;
      case OutcomeAction::kRestart:
        s.terminal = TerminalKind::kRestart;
        s.label = b.label;
        s.events = {evo, PublicEvent{PublicEvent::Kind::kRestart, -1, -1, -1, -1}};
        break;
      case OutcomeAction::kContinue: {
        ClassicalUpdate cu = spec.delta_s(cfg.state, sym, cfg.cell_p1, cfg.cell_p0, b.outcome);
        if (cu.next == kRestartTarget) {
          s.terminal = TerminalKind::kRestart;
          s.label = b.label;
          s.events = {evo, PublicEvent{PublicEvent::Kind::kRestart, -1, -1, -1, -1}};
          break;
        }
        StateKind nk = spec.state_kind(cu.next);
        if (nk == StateKind::kAccept || nk == StateKind::kReject) {
          s.terminal = nk == StateKind::kAccept ? TerminalKind::kAccept : TerminalKind::kReject;
          s.label = b.label.empty() ? "state:" + spec.state_name(cu.next) : b.label;
          s.events = {evo, PublicEvent{PublicEvent::Kind::kHalt, -1, -1, -1,
                                       nk == StateKind::kAccept ? 1 : 0}};
          break;
        }
        s.cfg = cfg;
        s.cfg.state = cu.next;
        s.cfg.head = apply_head_move(cfg.head, cu.move, w, spec, cfg.state);
        s.cfg.reg = std::move(b.reg);
        s.p1 = p1.clone();
        s.p0 = p0.clone();
        s.p1->observe(evo);
        s.p0->observe(evo);
        s.events = {evo};
        break;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact round analysis: absorbing-chain solve over the configuration graph.
// ---------------------------------------------------------------------------

namespace {

std::string register_key(const Register& reg) {
  std::string k;
  if (std::holds_alternative<StateVector>(reg)) {
    for (const auto& a : std::get<StateVector>(reg).amps) {
      k += a.str();
      k += ',';
    }
  } else {
    for (const auto& t : std::get<std::vector<RotationTracker>>(reg)) {
      k += std::to_string(t.steps);
      k += ',';
    }
  }
  return k;
}

std::string config_key(const MachineConfig& cfg, const DebaterStrategy& p1,
                       const DebaterStrategy& p0) {
  std::ostringstream os;
  os << cfg.state << '|' << cfg.head << '|' << cfg.cell_v << ',' << cfg.cell_p1 << ','
     << cfg.cell_p0 << '|' << register_key(cfg.reg) << '|' << p1.state_key() << '|'
     << p0.state_key();
  return os.str();
}

struct GraphNode {
  MachineConfig cfg;
  std::unique_ptr<DebaterStrategy> p1, p0;
  long depth = 0;
  bool expanded = false;
  std::vector<std::pair<int, Prob>> edges;
  std::vector<std::tuple<TerminalKind, std::string, Prob>> terms;
};

// Dense linear solve A x = b over Prob (exact when all entries are exact).
std::vector<Prob> solve_linear(std::vector<std::vector<Prob>> a, std::vector<Prob> b) {
  const size_t n = b.size();
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    while (piv < n && a[piv][col].is_zero()) ++piv;
    if (piv == n) throw std::runtime_error("round solver: singular component matrix");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col].is_zero()) continue;
      Prob f = a[r][col] / a[col][col];
      for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<Prob> x(n);
  for (size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

// Iterative Tarjan; returns components in reverse topological order
// (every component precedes the ones that can reach it).
std::vector<std::vector<int>> strongly_connected_components(const std::vector<GraphNode>& nodes) {
  const int n = static_cast<int>(nodes.size());
  std::vector<int> index(n, -1), low(n, 0), on_stack(n, 0);
  std::vector<int> stack;
  std::vector<std::vector<int>> components;
  int counter = 0;

  struct Frame { int v; size_t edge; };
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> frames{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.edge < nodes[f.v].edges.size()) {
        int to = nodes[f.v].edges[f.edge].first;
        ++f.edge;
        if (index[to] == -1) {
          index[to] = low[to] = counter++;
          stack.push_back(to);
          on_stack[to] = 1;
          frames.push_back({to, 0});
        } else if (on_stack[to]) {
          low[f.v] = std::min(low[f.v], index[to]);
        }
      } else {
        int v = f.v;
        frames.pop_back();
        if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
        if (low[v] == index[v]) {
          components.emplace_back();
          while (true) {
            int u = stack.back();
            stack.pop_back();
            on_stack[u] = 0;
            components.back().push_back(u);
            if (u == v) break;
          }
        }
      }
    }
  }
  return components;
}

}  // namespace

RoundDistribution run_round_exact(const VerifierSpec& spec, const std::string& w,
                                  const DebaterStrategy& p1, const DebaterStrategy& p0,
                                  const EngineCaps& caps, EngineObserver* observer) {
  std::vector<GraphNode> nodes;
  std::unordered_map<std::string, int> by_key;

  {
    GraphNode n0;
    n0.cfg = initial_config(spec);
    n0.p1 = p1.clone();
    n0.p0 = p0.clone();
    n0.p1->bind(spec);
    n0.p0->bind(spec);
    by_key.emplace(config_key(n0.cfg, *n0.p1, *n0.p0), 0);
    nodes.push_back(std::move(n0));
  }

  std::deque<int> work{0};
  while (!work.empty()) {
    int id = work.front();
    work.pop_front();
    if (nodes[id].depth >= caps.max_depth) continue;
    if (static_cast<long>(nodes.size()) >= caps.max_nodes && !nodes[id].expanded) continue;
    auto succs = step_exact(spec, w, nodes[id].cfg, *nodes[id].p1, *nodes[id].p0, observer);
    nodes[id].expanded = true;
    for (auto& s : succs) {
      if (s.weight.is_zero()) continue;
      if (s.terminal != TerminalKind::kNone) {
        nodes[id].terms.emplace_back(s.terminal, s.label, s.weight);
        continue;
      }
      std::string key = config_key(s.cfg, *s.p1, *s.p0);
      auto it = by_key.find(key);
      int target;
      if (it == by_key.end()) {
        target = static_cast<int>(nodes.size());
        GraphNode n;
        n.cfg = std::move(s.cfg);
        n.p1 = std::move(s.p1);
        n.p0 = std::move(s.p0);
        n.depth = nodes[id].depth + 1;
        by_key.emplace(std::move(key), target);
        nodes.push_back(std::move(n));
        if (static_cast<long>(nodes.size()) <= caps.max_nodes) work.push_back(target);
      } else {
        target = it->second;
      }
      nodes[id].edges.emplace_back(target, s.weight);
    }
  }

  auto components = strongly_connected_components(nodes);

  // Component index per node, and detection of intra-component edges.
  std::vector<int> comp_of(nodes.size(), -1);
  for (size_t c = 0; c < components.size(); ++c)
    for (int v : components[c]) comp_of[v] = static_cast<int>(c);

  const size_t n = nodes.size();
  std::vector<Prob> visits(n, Prob::zero());

  // Forward pass: expected visit counts. Tarjan order reversed = topological.
  {
    std::vector<Prob> inflow(n, Prob::zero());
    inflow[0] = Prob::one();
    for (auto it = components.rbegin(); it != components.rend(); ++it) {
      const auto& comp = *it;
      bool cyclic = comp.size() > 1;
      if (!cyclic) {
        int v = comp[0];
        for (const auto& [to, wgt] : nodes[v].edges)
          if (to == v) cyclic = true;
      }
      if (!cyclic) {
        int v = comp[0];
        visits[v] = inflow[v];
        for (const auto& [to, wgt] : nodes[v].edges) inflow[to] += visits[v] * wgt;
        continue;
      }
      // Solve (I - M^T) x = inflow on the component.
      std::unordered_map<int, size_t> pos;
      for (size_t i = 0; i < comp.size(); ++i) pos[comp[i]] = i;
      size_t m = comp.size();
      std::vector<std::vector<Prob>> a(m, std::vector<Prob>(m, Prob::zero()));
      std::vector<Prob> b(m, Prob::zero());
      for (size_t i = 0; i < m; ++i) {
        a[i][i] = Prob::one();
        b[i] = inflow[comp[i]];
      }
      for (size_t i = 0; i < m; ++i)
        for (const auto& [to, wgt] : nodes[comp[i]].edges) {
          auto jt = pos.find(to);
          if (jt != pos.end()) a[jt->second][i] -= wgt;
        }
      auto x = solve_linear(std::move(a), std::move(b));
      for (size_t i = 0; i < m; ++i) visits[comp[i]] = x[i];
      for (size_t i = 0; i < m; ++i)
        for (const auto& [to, wgt] : nodes[comp[i]].edges)
          if (!pos.count(to)) inflow[to] += visits[comp[i]] * wgt;
    }
  }

  RoundDistribution dist;
  dist.nodes = static_cast<long>(n);
  dist.accept = dist.reject = dist.restart = Prob::zero();

  bool truncated = false;
  for (size_t v = 0; v < n; ++v) {
    if (!nodes[v].expanded) {
      if (!visits[v].is_zero()) truncated = true;
      continue;
    }
    for (const auto& [term, label, wgt] : nodes[v].terms) {
      Prob mass = visits[v] * wgt;
      switch (term) {
        case TerminalKind::kAccept:
          dist.accept += mass;
          dist.accept_by_label[label] += mass;
          break;
        case TerminalKind::kReject:
          dist.reject += mass;
          dist.reject_by_label[label] += mass;
          break;
        case TerminalKind::kRestart: dist.restart += mass; break;
        case TerminalKind::kNone: break;
      }
    }
  }
  dist.residual = Prob::one() - dist.accept - dist.reject - dist.restart;
  dist.converged = !truncated;

  // Backward absorption probabilities per class, for step expectations.
  auto absorption = [&](TerminalKind cls) {
    std::vector<Prob> a_vec(n, Prob::zero());
    for (const auto& comp : components) {
      bool cyclic = comp.size() > 1;
      if (!cyclic) {
        int v = comp[0];
        for (const auto& [to, wgt] : nodes[v].edges)
          if (to == v) cyclic = true;
      }
      if (!cyclic) {
        int v = comp[0];
        Prob acc = Prob::zero();
        for (const auto& [term, label, wgt] : nodes[v].terms)
          if (term == cls) acc += wgt;
        for (const auto& [to, wgt] : nodes[v].edges) acc += wgt * a_vec[to];
        a_vec[v] = acc;
        continue;
      }
      std::unordered_map<int, size_t> pos;
      for (size_t i = 0; i < comp.size(); ++i) pos[comp[i]] = i;
      size_t m = comp.size();
      std::vector<std::vector<Prob>> a(m, std::vector<Prob>(m, Prob::zero()));
      std::vector<Prob> b(m, Prob::zero());
      for (size_t i = 0; i < m; ++i) {
        a[i][i] = Prob::one();
        int v = comp[i];
        for (const auto& [term, label, wgt] : nodes[v].terms)
          if (term == cls) b[i] += wgt;
        for (const auto& [to, wgt] : nodes[v].edges) {
          auto jt = pos.find(to);
          if (jt != pos.end())
            a[i][jt->second] -= wgt;
          else
            b[i] += wgt * a_vec[to];
        }
      }
      auto x = solve_linear(std::move(a), std::move(b));
      for (size_t i = 0; i < m; ++i) a_vec[comp[i]] = x[i];
    }
    return a_vec;
  };

  auto acc_a = absorption(TerminalKind::kAccept);
  auto rej_a = absorption(TerminalKind::kReject);
  auto res_a = absorption(TerminalKind::kRestart);
  dist.steps_accept = dist.steps_reject = dist.steps_restart = Prob::zero();
  dist.expected_steps = Prob::zero();
  for (size_t v = 0; v < n; ++v) {
    if (!nodes[v].expanded || visits[v].is_zero()) continue;
    dist.expected_steps += visits[v];
    dist.steps_accept += visits[v] * acc_a[v];
    dist.steps_reject += visits[v] * rej_a[v];
    dist.steps_restart += visits[v] * res_a[v];
  }
  return dist;
}

// ---------------------------------------------------------------------------
// Sampled semantics.
// ---------------------------------------------------------------------------

namespace {

void append_events(std::vector<PublicEvent>* log, const std::vector<PublicEvent>& evs) {
  if (log) log->insert(log->end(), evs.begin(), evs.end());
}

}  // namespace

RoundResult run_round_sampled(const VerifierSpec& spec, const std::string& w, DebaterStrategy& p1,
                              DebaterStrategy& p0, Rng& rng, const EngineCaps& caps,
                              std::vector<PublicEvent>* event_log, EngineObserver* observer) {
  MachineConfig cfg = initial_config(spec);
  p1.bind(spec);
  p0.bind(spec);
  RoundResult res;
  while (res.steps_used < caps.max_steps_per_round) {
    ++res.steps_used;
    StateKind kind = spec.state_kind(cfg.state);
    char sym = input_symbol_at(w, cfg.head);
    if (kind == StateKind::kComm) {
      CommWrite cw = spec.delta_c(cfg.state, sym);
      PublicEvent ev1{PublicEvent::Kind::kVerifierWrote, cw.write, -1, -1, -1};
      p1.observe(ev1);
      p0.observe(ev1);
      Symbol g1 = intern_emission(spec, p1, p1.emit());
      Symbol g0 = intern_emission(spec, p0, p0.emit());
      PublicEvent ev2{PublicEvent::Kind::kDebatersWrote, -1, g1, g0, -1};
      p1.observe(ev2);
      p0.observe(ev2);
      append_events(event_log, {ev1, ev2});
      cfg.state = cw.next;
      cfg.cell_v = cw.write;
      cfg.cell_p1 = g1;
      cfg.cell_p0 = g0;
      continue;
    }
    QuantumAction qa = spec.delta_q(cfg.state, sym, cfg.cell_p1, cfg.cell_p0);
    auto branches = quantum_branches(spec, cfg, qa, observer);
    size_t pick = 0;
    if (branches.size() > 1) {
      double u = rng.uniform();
      double acc = 0;
      pick = branches.size() - 1;
      for (size_t i = 0; i < branches.size(); ++i) {
        acc += branches[i].weight.to_double();
        if (u < acc) { pick = i; break; }
      }
    }
    auto& b = branches.at(pick);
    PublicEvent evo{PublicEvent::Kind::kOutcome, -1, -1, -1, b.outcome};
    p1.observe(evo);
    p0.observe(evo);
    append_events(event_log, {evo});

    auto finish = [&](TerminalKind term, const std::string& label, int halt_flag) {
      res.kind = term;
      res.label = label;
      PublicEvent ev{term == TerminalKind::kRestart ? PublicEvent::Kind::kRestart
                                                    : PublicEvent::Kind::kHalt,
                     -1, -1, -1, halt_flag};
      p1.observe(ev);
      p0.observe(ev);
      append_events(event_log, {ev});
    };

    if (b.action == OutcomeAction::kAccept) { finish(TerminalKind::kAccept, b.label, 1); return res; }
    if (b.action == OutcomeAction::kReject) { finish(TerminalKind::kReject, b.label, 0); return res; }
    if (b.action == OutcomeAction::kRestart) { finish(TerminalKind::kRestart, b.label, -1); return res; }

    ClassicalUpdate cu = spec.delta_s(cfg.state, sym, cfg.cell_p1, cfg.cell_p0, b.outcome);
    if (cu.next == kRestartTarget) { finish(TerminalKind::kRestart, b.label, -1); return res; }
    StateKind nk = spec.state_kind(cu.next);
    if (nk == StateKind::kAccept) { finish(TerminalKind::kAccept, "state:" + spec.state_name(cu.next), 1); return res; }
    if (nk == StateKind::kReject) { finish(TerminalKind::kReject, "state:" + spec.state_name(cu.next), 0); return res; }
    cfg.state = cu.next;
    cfg.head = apply_head_move(cfg.head, cu.move, w, spec, cfg.state);
    cfg.reg = std::move(b.reg);
  }
  res.kind = TerminalKind::kNone;  // budget exhausted
  return res;
}

Decision run_debate(const VerifierSpec& spec, const std::string& w, DebaterStrategy& p1,
                    DebaterStrategy& p0, Rng& rng, const EngineCaps& caps,
                    std::vector<PublicEvent>* event_log) {
  Decision d;
  p1.reset();
  p0.reset();
  for (long round = 1; round <= caps.max_restarts; ++round) {
    RoundResult rr = run_round_sampled(spec, w, p1, p0, rng, caps, event_log);
    d.rounds = round;
    d.total_steps += rr.steps_used;
    if (rr.kind == TerminalKind::kAccept) { d.kind = Decision::Kind::kAccept; return d; }
    if (rr.kind == TerminalKind::kReject) { d.kind = Decision::Kind::kReject; return d; }
    if (rr.kind == TerminalKind::kNone) { d.kind = Decision::Kind::kNoDecision; return d; }
    p1.reset();
    p0.reset();
  }
  d.kind = Decision::Kind::kNoDecision;
  return d;
}

Rational overall_acceptance(const Rational& p_accept, const Rational& p_reject) {
  Rational halting = p_accept + p_reject;
  if (halting.is_zero()) throw std::domain_error("overall_acceptance: nonhalting debate");
  return p_accept / halting;
}

Prob overall_acceptance(const Prob& p_accept, const Prob& p_reject) {
  Prob halting = p_accept + p_reject;
  if (halting.is_zero()) throw std::domain_error("overall_acceptance: nonhalting debate");
  return p_accept / halting;
}

std::vector<std::string> validate(const VerifierSpec& spec) {
  std::vector<std::string> defects;
  if (spec.uses_vector_register()) {
    if (spec.vector_dim() < 1 || spec.vector_dim() > 8)
      defects.push_back("vector register dimension must be in 1..8");
  } else if (spec.tracker_count() < 1) {
    defects.push_back("rotation register needs at least one tracker");
  }
  if (spec.comm_alphabet().empty()) defects.push_back("empty communication alphabet");
  for (int i = 0; i < spec.superop_count(); ++i) {
    const auto& op = spec.superop(i);
    try {
      if (!check_completeness(op))
        defects.push_back("superoperator '" + op.label + "' fails the completeness equation");
      if (spec.uses_vector_register() && op.dim() != spec.vector_dim())
        defects.push_back("superoperator '" + op.label + "' dimension differs from the register");
    } catch (const std::exception& e) {
      defects.push_back(std::string("superoperator structural error: ") + e.what());
    }
  }
  auto extra = spec.self_check();
  defects.insert(defects.end(), extra.begin(), extra.end());
  return defects;
}

// ---------------------------------------------------------------------------
// Table-backed spec.
// ---------------------------------------------------------------------------

StateKind TableVerifierSpec::state_kind(StateId s) const {
  return states.at(static_cast<size_t>(s)).kind;
}

std::string TableVerifierSpec::state_name(StateId s) const {
  if (s == kRestartTarget) return "<restart>";
  return states.at(static_cast<size_t>(s)).name;
}

StateId TableVerifierSpec::state_id(const std::string& n) const {
  for (size_t i = 0; i < states.size(); ++i)
    if (states[i].name == n) return static_cast<StateId>(i);
  return -1;
}

CommWrite TableVerifierSpec::delta_c(StateId s, char sym) const {
  const CRow* fallback = nullptr;
  for (const auto& r : c_rows) {
    if (r.s != s) continue;
    if (!r.any_sym && r.sym == sym) return r.out;
    if (r.any_sym && !fallback) fallback = &r;
  }
  if (fallback) return fallback->out;
  throw SpecIncompleteError("missing delta_c entry for (" + state_name(s) + ", " +
                            std::string(1, sym) + ")");
}

QuantumAction TableVerifierSpec::delta_q(StateId s, char sym, Symbol gp, Symbol gr) const {
  const QRow* best = nullptr;
  int best_rank = 99;
  for (const auto& r : q_rows) {
    if (r.s != s) continue;
    bool sym_ok = r.any_sym || r.sym == sym;
    bool pair_ok = r.any_pair || (r.gp == gp && r.gr == gr);
    if (!sym_ok || !pair_ok) continue;
    int rank = (r.any_sym ? 1 : 0) + (r.any_pair ? 2 : 0);
    if (rank < best_rank) { best = &r; best_rank = rank; }
  }
  if (best) return best->out;
  throw SpecIncompleteError("missing delta_q entry for (" + state_name(s) + ", " +
                            std::string(1, sym) + ", " + std::to_string(gp) + ", " +
                            std::to_string(gr) + ")");
}

ClassicalUpdate TableVerifierSpec::delta_s(StateId s, char sym, Symbol gp, Symbol gr,
                                           int outcome) const {
  const SRow* best = nullptr;
  int best_rank = 99;
  for (const auto& r : s_rows) {
    if (r.s != s || r.outcome != outcome) continue;
    bool sym_ok = r.any_sym || r.sym == sym;
    bool pair_ok = r.any_pair || (r.gp == gp && r.gr == gr);
    if (!sym_ok || !pair_ok) continue;
    int rank = (r.any_sym ? 1 : 0) + (r.any_pair ? 2 : 0);
    if (rank < best_rank) { best = &r; best_rank = rank; }
  }
  if (best) return best->out;
  throw SpecIncompleteError("missing delta_s entry for (" + state_name(s) + ", " +
                            std::string(1, sym) + ", " + std::to_string(gp) + ", " +
                            std::to_string(gr) + ", outcome " + std::to_string(outcome) + ")");
}

std::vector<std::string> TableVerifierSpec::self_check() const {
  std::vector<std::string> defects;
  int accepts = 0, rejects = 0;
  for (const auto& st : states) {
    if (st.kind == StateKind::kAccept) ++accepts;
    if (st.kind == StateKind::kReject) ++rejects;
  }
  if (accepts != 1) defects.push_back("need exactly one accepting state");
  if (rejects != 1) defects.push_back("need exactly one rejecting state");
  if (initial < 0 || initial >= static_cast<StateId>(states.size()))
    defects.push_back("initial state out of range");
  for (const auto& r : c_rows) {
    if (state_kind(r.s) != StateKind::kComm)
      defects.push_back("delta_c row on non-communication state " + state_name(r.s));
    if (r.out.next < 0 || r.out.next >= static_cast<StateId>(states.size()) ||
        state_kind(r.out.next) != StateKind::kRead)
      defects.push_back("delta_c target must be a reading state (from " + state_name(r.s) + ")");
    if (r.out.write < 0 || r.out.write >= static_cast<Symbol>(alphabet.size()))
      defects.push_back("delta_c writes a symbol outside the communication alphabet");
  }
  for (const auto& r : q_rows) {
    if (state_kind(r.s) != StateKind::kRead)
      defects.push_back("delta_q row on non-reading state " + state_name(r.s));
    if (r.out.superop >= 0) {
      if (r.out.superop >= superop_count())
        defects.push_back("delta_q references unknown superoperator index " +
                          std::to_string(r.out.superop));
      else {
        // Every continue outcome must have a delta_s row.
        const auto& op = superops[static_cast<size_t>(r.out.superop)];
        for (size_t i = 0; i < op.elements.size(); ++i) {
          if (op.elements[i].action != OutcomeAction::kContinue) continue;
          try {
            delta_s(r.s, r.any_sym ? 'a' : r.sym, r.gp, r.gr, static_cast<int>(i));
          } catch (const SpecIncompleteError&) {
            defects.push_back("delta_s missing for state " + state_name(r.s) + " outcome " +
                              std::to_string(i) + " of superoperator '" + op.label + "'");
          }
        }
      }
    } else if (r.out.rotation) {
      if (vector_register)
        defects.push_back("rotation action on a vector-register machine (state " +
                          state_name(r.s) + ")");
      if (r.out.rotation->kind == RotationAction::Kind::kRotate &&
          static_cast<int>(r.out.rotation->deltas.size()) != trackers)
        defects.push_back("rotation delta arity mismatch in state " + state_name(r.s));
    } else {
      defects.push_back("delta_q row with no action in state " + state_name(r.s));
    }
  }
  for (const auto& r : s_rows) {
    if (r.out.next != kRestartTarget &&
        (r.out.next < 0 || r.out.next >= static_cast<StateId>(states.size())))
      defects.push_back("delta_s target out of range from state " + state_name(r.s));
  }
  return defects;
}

bool TableVerifierSpec::structurally_equal(const TableVerifierSpec& o) const {
  auto qa_eq = [](const QuantumAction& x, const QuantumAction& y) {
    if (x.superop != y.superop) return false;
    if (x.rotation.has_value() != y.rotation.has_value()) return false;
    if (!x.rotation) return true;
    return x.rotation->kind == y.rotation->kind && x.rotation->deltas == y.rotation->deltas &&
           x.rotation->tracker == y.rotation->tracker && x.rotation->outcomes == y.rotation->outcomes &&
           x.rotation->fixed_outcome == y.rotation->fixed_outcome;
  };
  if (spec_name != o.spec_name || vector_register != o.vector_register || dim != o.dim ||
      trackers != o.trackers || !(unit == o.unit) || initial != o.initial ||
      alphabet != o.alphabet || input_alphabet != o.input_alphabet ||
      states.size() != o.states.size() || superops.size() != o.superops.size() ||
      c_rows.size() != o.c_rows.size() || q_rows.size() != o.q_rows.size() ||
      s_rows.size() != o.s_rows.size())
    return false;
  for (size_t i = 0; i < states.size(); ++i)
    if (states[i].name != o.states[i].name || states[i].kind != o.states[i].kind) return false;
  for (size_t i = 0; i < superops.size(); ++i) {
    if (superops[i].label != o.superops[i].label ||
        superops[i].elements.size() != o.superops[i].elements.size())
      return false;
    for (size_t j = 0; j < superops[i].elements.size(); ++j) {
      const auto& a = superops[i].elements[j];
      const auto& b = o.superops[i].elements[j];
      if (!(a.matrix == b.matrix) || a.action != b.action || a.label != b.label) return false;
    }
  }
  for (size_t i = 0; i < c_rows.size(); ++i) {
    const auto& a = c_rows[i];
    const auto& b = o.c_rows[i];
    if (a.s != b.s || a.sym != b.sym || a.any_sym != b.any_sym || a.out.write != b.out.write ||
        a.out.next != b.out.next)
      return false;
  }
  for (size_t i = 0; i < q_rows.size(); ++i) {
    const auto& a = q_rows[i];
    const auto& b = o.q_rows[i];
    if (a.s != b.s || a.sym != b.sym || a.any_sym != b.any_sym || a.gp != b.gp || a.gr != b.gr ||
        a.any_pair != b.any_pair || !qa_eq(a.out, b.out))
      return false;
  }
  for (size_t i = 0; i < s_rows.size(); ++i) {
    const auto& a = s_rows[i];
    const auto& b = o.s_rows[i];
    if (a.s != b.s || a.sym != b.sym || a.any_sym != b.any_sym || a.gp != b.gp || a.gr != b.gr ||
        a.any_pair != b.any_pair || a.outcome != b.outcome || a.out.next != b.out.next ||
        a.out.move != b.out.move)
      return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Derandomization (hard-wired coin outcomes).
// ---------------------------------------------------------------------------

namespace {

bool is_scalar_identity(const RationalMatrix& m) {
  const Rational& c = m.at(0, 0);
  for (int r = 0; r < m.dim; ++r)
    for (int col = 0; col < m.dim; ++col) {
      if (r == col && !(m.at(r, col) == c)) return false;
      if (r != col && !m.at(r, col).is_zero()) return false;
    }
  return true;
}

class DerandomizedVerifier : public VerifierSpec {
 public:
  DerandomizedVerifier(std::shared_ptr<const VerifierSpec> base, std::vector<int> seq)
      : base_(std::move(base)), seq_(std::move(seq)) {
    for (int i = 0; i < base_->superop_count(); ++i)
      for (const auto& el : base_->superop(i).elements)
        if (!is_scalar_identity(el.matrix))
          throw std::invalid_argument(
              "derandomize: verifier uses amplitude encoding (non-coin superoperator '" +
              base_->superop(i).label + "')");
    intern(base_->initial_state(), 0);
  }

  std::string name() const override { return base_->name() + "+derandomized"; }
  bool uses_vector_register() const override { return base_->uses_vector_register(); }
  int vector_dim() const override { return base_->vector_dim(); }
  int tracker_count() const override { return base_->tracker_count(); }
  Rational rotation_unit() const override { return base_->rotation_unit(); }
  StateId initial_state() const override { return 0; }
  StateKind state_kind(StateId s) const override { return base_->state_kind(pairs_[s].first); }
  std::string state_name(StateId s) const override {
    return base_->state_name(pairs_[s].first) + "@" + std::to_string(pairs_[s].second);
  }
  const std::vector<std::string>& comm_alphabet() const override { return base_->comm_alphabet(); }
  int superop_count() const override { return base_->superop_count(); }
  const Superoperator& superop(int index) const override { return base_->superop(index); }
  std::vector<std::string> self_check() const override { return base_->self_check(); }

  CommWrite delta_c(StateId s, char sym) const override {
    auto [b, pos] = pairs_[s];
    CommWrite cw = base_->delta_c(b, sym);
    cw.next = intern(cw.next, pos);
    return cw;
  }

  QuantumAction delta_q(StateId s, char sym, Symbol gp, Symbol gr) const override {
    auto [b, pos] = pairs_[s];
    QuantumAction qa = base_->delta_q(b, sym, gp, gr);
    int branches = branch_count(qa);
    if (branches <= 1) return qa;
    if (pos >= static_cast<int>(seq_.size()))
      throw SpecIncompleteError("derandomize: hard-wired outcome sequence exhausted after " +
                                std::to_string(seq_.size()) + " coin uses");
    int fixed = seq_[static_cast<size_t>(pos)];
    if (fixed < 0 || fixed >= branches)
      throw SpecIncompleteError("derandomize: outcome " + std::to_string(fixed) +
                                " out of range for a " + std::to_string(branches) + "-way coin");
    QuantumAction out;
    RotationAction ra;
    ra.kind = RotationAction::Kind::kFixed;
    ra.fixed_outcome = fixed;
    out.superop = qa.superop;  // engine reads the element action, skips the matrix
    out.rotation = ra;
    return out;
  }

  ClassicalUpdate delta_s(StateId s, char sym, Symbol gp, Symbol gr, int outcome) const override {
    auto [b, pos] = pairs_[s];
    QuantumAction qa = base_->delta_q(b, sym, gp, gr);
    int next_pos = pos + (branch_count(qa) > 1 ? 1 : 0);
    ClassicalUpdate cu = base_->delta_s(b, sym, gp, gr, outcome);
    if (cu.next != kRestartTarget) cu.next = intern(cu.next, next_pos);
    return cu;
  }

 private:
  int branch_count(const QuantumAction& qa) const {
    if (qa.superop >= 0) return static_cast<int>(base_->superop(qa.superop).elements.size());
    if (qa.rotation) {
      if (qa.rotation->kind == RotationAction::Kind::kCoin) return qa.rotation->outcomes;
      if (qa.rotation->kind == RotationAction::Kind::kMeasure)
        throw std::invalid_argument("derandomize: rotation measurements are not classical coins");
    }
    return 1;
  }

  StateId intern(StateId base_state, int pos) const {
    auto key = std::make_pair(base_state, pos);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    StateId id = static_cast<StateId>(pairs_.size());
    pairs_.push_back(key);
    index_.emplace(key, id);
    return id;
  }

  std::shared_ptr<const VerifierSpec> base_;
  std::vector<int> seq_;
  mutable std::vector<std::pair<StateId, int>> pairs_;
  mutable std::map<std::pair<StateId, int>, StateId> index_;
};

}  // namespace

std::unique_ptr<VerifierSpec> derandomize(std::shared_ptr<const VerifierSpec> base,
                                          std::vector<int> fixed_outcomes) {
  return std::make_unique<DerandomizedVerifier>(std::move(base), std::move(fixed_outcomes));
}

}  // namespace qdl

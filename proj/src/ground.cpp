#include "cgap/ground.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cgap {

namespace {

// Deduplicated edge facts of one edge predicate. Duplicate (u,v) facts keep
// the largest weight, which is the value the pair takes in any minimal model.
struct EdgeFacts {
  std::vector<VertexId> src, dst;
  std::vector<double> w;
  std::unordered_map<std::int64_t, std::int32_t> by_pair;
  std::unordered_map<VertexId, std::vector<std::int32_t>> by_src, by_dst;

  static std::int64_t pkey(VertexId u, VertexId v) {
    return (static_cast<std::int64_t>(u) << 32) |
           static_cast<std::uint32_t>(v);
  }

  void add(VertexId u, VertexId v, double weight) {
    auto [it, fresh] = by_pair.try_emplace(pkey(u, v), static_cast<std::int32_t>(src.size()));
    if (!fresh) {
      w[static_cast<size_t>(it->second)] = std::max(w[static_cast<size_t>(it->second)], weight);
      return;
    }
    by_src[u].push_back(it->second);
    by_dst[v].push_back(it->second);
    src.push_back(u);
    dst.push_back(v);
    w.push_back(weight);
  }

  std::int32_t size() const { return static_cast<std::int32_t>(src.size()); }
};

class Grounder {
 public:
  Grounder(Program p, const GroundOptions& opts) : p_(std::move(p)), opts_(opts) {}

  GroundProgram run() {
    p_.validate();
    if (p_.vertex_count() == 0)
      throw ValidationError("cannot ground: the vertex domain is empty");
    gp_.atoms = std::make_shared<AtomTable>();
    gp_.fns = p_.functions();
    index_edge_facts();
    const auto& rules = p_.rules();
    for (std::int32_t ri = 0; ri < static_cast<std::int32_t>(rules.size()); ++ri)
      ground_rule(ri);
    const auto& tmpls = p_.templates();
    for (std::int32_t ti = 0; ti < static_cast<std::int32_t>(tmpls.size()); ++ti)
      expand_template(ti);
    ground_vc();
    gp_.rebuild_index();
    gp_.source = std::make_shared<Program>(std::move(p_));
    return std::move(gp_);
  }

 private:
  void index_edge_facts() {
    for (const auto& r : p_.rules()) {
      if (!r.is_fact() || !r.head.ground()) continue;
      if (p_.predicate(r.head.pred).kind != PredKind::edge) continue;
      edges_[r.head.pred].add(r.head.args[0].id, r.head.args[1].id, r.ann.value);
    }
  }

  FnId constant_fn(double v) {
    auto it = const_fns_.find(v);
    if (it != const_fns_.end()) return it->second;
    FnId id = gp_.fns.add(AnnotationFn::constant(v));
    const_fns_.emplace(v, id);
    return id;
  }

  FnId identity_fn() {
    if (identity_fn_ < 0) identity_fn_ = gp_.fns.intern(AnnotationFn::identity());
    return identity_fn_;
  }

  void bump_instances(std::int64_t by = 1) {
    instances_ += by;
    if (instances_ > opts_.cap)
      throw CapExceededError("grounding exceeds the instance cap (" +
                             std::to_string(opts_.cap) + ")");
  }

  // ---- source rules ----

  void ground_rule(std::int32_t ri) {
    const GapRule& r = p_.rules()[static_cast<size_t>(ri)];

    // Head function and the prop positions feeding each argument. Annotation
    // variables are identified with the position of the prop atom they tag.
    FnId fn = -1;
    std::vector<VarId> arg_prop;
    switch (r.ann.kind) {
      case AnnotationExpr::Kind::constant:
        fn = constant_fn(r.ann.value);
        break;
      case AnnotationExpr::Kind::variable:
        fn = identity_fn();
        arg_prop = {r.ann.var};
        break;
      case AnnotationExpr::Kind::apply:
        fn = r.ann.fn;
        arg_prop = r.ann.args;
        break;
    }

    int nvars = static_cast<int>(r.var_names.size());
    std::vector<VertexId> asg(static_cast<size_t>(nvars), -1);

    // Edge-typed conditions with a positive bound drive the search: a binding
    // is only explored where a matching edge fact carries enough weight.
    std::vector<const CondAtom*> binders;
    for (const auto& c : r.conds)
      if (p_.predicate(c.atom.pred).kind == PredKind::edge && c.bound > kEpsEq)
        binders.push_back(&c);

    auto emit = [&]() {
      bump_instances();
      GroundAtom h{r.head.pred, value_of(r.head.args[0], asg),
                   r.head.arity == 2 ? value_of(r.head.args[1], asg) : -1};
      AtomId head = gp_.atoms->intern(h);
      scratch_props_.clear();
      for (VarId a : arg_prop) {
        const Atom& pa = r.prop[static_cast<size_t>(a)].atom;
        scratch_props_.push_back(gp_.atoms->intern(ground_of(pa, asg)));
      }
      scratch_conds_.clear();
      for (const auto& c : r.conds)
        scratch_conds_.push_back({gp_.atoms->intern(ground_of(c.atom, asg)), c.bound});
      gp_.push_rule(head, fn, scratch_props_, scratch_conds_, RuleOrigin::source, ri);
    };

    // Enumerates vertices for every variable left open by the binder atoms.
    auto enumerate_free = [&]() {
      std::vector<VarId> free;
      for (VarId x = 0; x < nvars; ++x)
        if (asg[static_cast<size_t>(x)] < 0) free.push_back(x);
      double est = std::pow(static_cast<double>(p_.vertex_count()),
                            static_cast<double>(free.size()));
      if (static_cast<double>(instances_) + est > static_cast<double>(opts_.cap))
        throw CapExceededError("grounding exceeds the instance cap (" +
                               std::to_string(opts_.cap) + ")");
      std::function<void(size_t)> rec = [&](size_t k) {
        if (k == free.size()) {
          emit();
          return;
        }
        for (VertexId v = 0; v < p_.vertex_count(); ++v) {
          asg[static_cast<size_t>(free[k])] = v;
          rec(k + 1);
        }
        asg[static_cast<size_t>(free[k])] = -1;
      };
      rec(0);
    };

    std::function<void(size_t)> bind = [&](size_t k) {
      if (k == binders.size()) {
        enumerate_free();
        return;
      }
      const CondAtom& c = *binders[k];
      auto it = edges_.find(c.atom.pred);
      if (it == edges_.end()) return;  // no facts: the condition can never hold
      const EdgeFacts& ef = it->second;

      VertexId b0 = value_of(c.atom.args[0], asg);
      VertexId b1 = value_of(c.atom.args[1], asg);
      const std::vector<std::int32_t>* cand = nullptr;
      std::vector<std::int32_t> one;
      if (b0 >= 0 && b1 >= 0) {
        auto pit = ef.by_pair.find(EdgeFacts::pkey(b0, b1));
        if (pit == ef.by_pair.end()) return;
        one.push_back(pit->second);
        cand = &one;
      } else if (b0 >= 0) {
        auto sit = ef.by_src.find(b0);
        if (sit == ef.by_src.end()) return;
        cand = &sit->second;
      } else if (b1 >= 0) {
        auto dit = ef.by_dst.find(b1);
        if (dit == ef.by_dst.end()) return;
        cand = &dit->second;
      } else {
        all_.resize(static_cast<size_t>(ef.size()));
        for (std::int32_t i = 0; i < ef.size(); ++i) all_[static_cast<size_t>(i)] = i;
        cand = &all_;
      }

      for (std::int32_t idx : *cand) {
        if (ef.w[static_cast<size_t>(idx)] < c.bound - kEpsEq) continue;
        VertexId fu = ef.src[static_cast<size_t>(idx)];
        VertexId fv = ef.dst[static_cast<size_t>(idx)];
        int set0 = try_bind(c.atom.args[0], fu, asg);
        if (set0 < 0) continue;
        int set1 = try_bind(c.atom.args[1], fv, asg);
        if (set1 < 0) {
          if (set0 > 0) asg[static_cast<size_t>(c.atom.args[0].id)] = -1;
          continue;
        }
        bind(k + 1);
        if (set1 > 0) asg[static_cast<size_t>(c.atom.args[1].id)] = -1;
        if (set0 > 0) asg[static_cast<size_t>(c.atom.args[0].id)] = -1;
      }
    };

    bind(0);
  }

  static VertexId value_of(const Term& t, const std::vector<VertexId>& asg) {
    return t.is_var ? asg[static_cast<size_t>(t.id)] : t.id;
  }

  static GroundAtom ground_of(const Atom& a, const std::vector<VertexId>& asg) {
    return GroundAtom{a.pred, value_of(a.args[0], asg),
                      a.arity == 2 ? value_of(a.args[1], asg) : -1};
  }

  // Matches `t` against vertex `v`: returns 1 if a variable was newly bound,
  // 0 if already consistent, -1 on mismatch.
  static int try_bind(const Term& t, VertexId v, std::vector<VertexId>& asg) {
    if (!t.is_var) return t.id == v ? 0 : -1;
    VertexId& slot = asg[static_cast<size_t>(t.id)];
    if (slot < 0) {
      slot = v;
      return 1;
    }
    return slot == v ? 0 : -1;
  }

  // ---- neighborhood templates ----

  void expand_template(std::int32_t ti) {
    const NeighborTemplate& t = p_.templates()[static_cast<size_t>(ti)];
    FnId fn;
    if (t.agg == NeighborTemplate::Agg::avg) {
      fn = gp_.fns.intern(AnnotationFn::avg_fn());
    } else if (t.tip) {
      fn = gp_.fns.intern(AnnotationFn::gated_max_fn(*t.tip));
    } else {
      fn = gp_.fns.intern(AnnotationFn::max_fn());
    }

    auto it = edges_.find(t.edge_pred);
    if (it == edges_.end()) return;
    const EdgeFacts& ef = it->second;

    std::vector<std::pair<VertexId, std::vector<VertexId>>> per_vertex;
    for (const auto& [v, idxs] : ef.by_dst) {
      std::vector<VertexId> nbr;
      for (std::int32_t idx : idxs)
        if (ef.w[static_cast<size_t>(idx)] >= 1.0 - kEpsEq)
          nbr.push_back(ef.src[static_cast<size_t>(idx)]);
      if (nbr.empty()) continue;
      std::sort(nbr.begin(), nbr.end());
      per_vertex.emplace_back(v, std::move(nbr));
    }
    std::sort(per_vertex.begin(), per_vertex.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    for (auto& [v, nbr] : per_vertex) {
      bump_instances();
      AtomId head = gp_.atoms->intern(GroundAtom{t.head_pred, v, -1});
      scratch_props_.clear();
      for (VertexId u : nbr)
        scratch_props_.push_back(gp_.atoms->intern(GroundAtom{t.body_pred, u, -1}));
      gp_.push_rule(head, fn, scratch_props_, {}, RuleOrigin::tmpl, ti);
    }
  }

  // ---- vertex choice ----

  void ground_vc() {
    const VCRule& vc = *p_.vc();
    for (VertexId v = 0; v < p_.vertex_count(); ++v) {
      VcInstance inst;
      inst.v = v;
      inst.heads.reserve(vc.heads.size());
      inst.bodies.reserve(vc.bodies.size());
      for (PredId b : vc.heads)
        inst.heads.push_back(gp_.atoms->intern(GroundAtom{b, v, -1}));
      for (PredId a : vc.bodies)
        inst.bodies.push_back(gp_.atoms->intern(GroundAtom{a, v, -1}));
      gp_.vcs.push_back(std::move(inst));
    }
  }

  Program p_;
  GroundOptions opts_;
  GroundProgram gp_;
  std::unordered_map<PredId, EdgeFacts> edges_;
  std::unordered_map<double, FnId> const_fns_;
  FnId identity_fn_ = -1;
  std::int64_t instances_ = 0;
  std::vector<AtomId> scratch_props_;
  std::vector<GroundCond> scratch_conds_;
  std::vector<std::int32_t> all_;
};

}  // namespace

GroundProgram ground(Program prog, const GroundOptions& opts) {
  return Grounder(std::move(prog), opts).run();
}

GroundProgram ground(Program prog, const SocialNetwork& sn, const GroundOptions& opts) {
  sn_to_facts(sn, prog);
  return Grounder(std::move(prog), opts).run();
}

}  // namespace cgap

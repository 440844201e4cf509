#include "bhavnet/synthetic.hpp"

#include "bhavnet/autodiff.hpp"
#include "bhavnet/model.hpp"
#include "bhavnet/objective.hpp"
#include "bhavnet/rng.hpp"

namespace bhavnet {
namespace {

std::vector<double> normal_vector(Rng& rng, std::size_t dim, double sd) {
  std::vector<double> v(dim);
  for (double& x : v) x = sd * rng.normal();
  return v;
}

std::vector<LabeledPair> make_split(std::size_t count, std::size_t& next_id, const SyntheticSpec& spec,
                                    EmbeddingTable& table, Rng& rng) {
  std::vector<LabeledPair> out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t id = next_id++;
    const Relation label = i % 2 == 0 ? Relation::synonym : Relation::antonym;
    const std::vector<double> v = normal_vector(rng, spec.dim, 1.0);
    std::vector<double> w = normal_vector(rng, spec.dim, spec.noise);
    const double sign = label == Relation::synonym ? 1.0 : -1.0;
    for (std::size_t k = 0; k < spec.dim; ++k) w[k] += sign * v[k];
    const std::string a = "a" + std::to_string(id);
    const std::string b = "b" + std::to_string(id);
    table.insert(a, v);
    table.insert(b, w);
    out.push_back({a, b, label, spec.language});
  }
  rng.shuffle(std::span(out));
  return out;
}

}  // namespace

SyntheticTask make_synthetic_task(const SyntheticSpec& spec) {
  Rng rng = Rng::stream(spec.seed, Stream::data);
  SyntheticTask task{EmbeddingTable(spec.dim, spec.language), {}, {}, {}};
  std::size_t next_id = 0;
  task.train = make_split(spec.train, next_id, spec, task.table, rng);
  task.dev = make_split(spec.dev, next_id, spec, task.table, rng);
  task.test = make_split(spec.test, next_id, spec, task.table, rng);
  return task;
}

HyperParams tiny_hyperparams() {
  HyperParams hp;
  hp.d = 8;
  hp.d_prime = 4;
  hp.fused_dim = 8;
  hp.H = 2;
  hp.L_layers = 1;
  hp.batch_size = 4;
  return hp.resolved();
}

GradCheckFixture make_grad_check_fixture(const HyperParams& hp_in, std::uint64_t seed) {
  const HyperParams hp = hp_in.resolved();
  hp.validate();
  Rng rng = Rng::stream(seed, Stream::data);
  GradCheckFixture fx{hp, EmbeddingTable(hp.d, "fixture"), {}, {}};
  for (const char* token : {"p", "q", "r", "s", "t", "u"}) fx.table.insert(token, normal_vector(rng, hp.d, 1.0));
  // Shared words chain nodes 0-1-2 (plus a transitive 0-2 edge); node 3 stands alone.
  fx.batch = {{"p", "q", Relation::synonym, "fixture"},
              {"q", "r", Relation::antonym, "fixture"},
              {"r", "s", Relation::synonym, "fixture"},
              {"t", "u", Relation::antonym, "fixture"}};
  Rng init = Rng::stream(seed, Stream::init);
  fx.params = init_params(hp, init);
  // Nonzero biases so the bias gradients are exercised away from symmetric points.
  fx.params.for_each([&](const std::string& name, Tensor& t) {
    if (name.rfind("b_", 0) == 0)
      for (double& x : t.data()) x = 0.1 * rng.normal();
  });
  return fx;
}

GradCheckResult check_model_gradients(const GradCheckFixture& fx, double eps) {
  const TapeFunction f = [&fx](Tape& tape, const std::vector<Var>& leaves) {
    const ParamVars vars = assemble(fx.params, leaves);
    Rng unused(0);
    const BatchForward fwd = forward_batch(tape, vars, fx.batch, fx.table, fx.hp, Mode::eval, unused);
    return ad::total_loss(tape, fwd, fx.batch, fx.hp).total;
  };
  return grad_check(f, flatten(fx.params), eps);
}

}  // namespace bhavnet

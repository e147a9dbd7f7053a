#include <doctest.h>

#include "metascat/calibrate.hpp"
#include "metascat/cavity.hpp"
#include "metascat/metrics.hpp"

using namespace metascat;

namespace {

TrainOptions quick_opts(std::uint64_t seed) {
  TrainOptions o;
  o.batch_size = 128;
  o.val_interval = 25;
  o.lr_plateau_iters = 800;
  o.patience_iters = 2400;
  o.max_iterations = 9000;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("port selections") {
  const PortSelection full = PortSelection::from_name("full", 4);
  CHECK(full.tx.size() == 4);
  CHECK(full.name() == "full");

  const PortSelection s31 = PortSelection::from_name("s31", 4);
  CHECK(s31.cavity_ports == std::vector<int>{0, 2});
  CHECK(s31.tx == std::vector<int>{0});
  CHECK(s31.rx == std::vector<int>{1});
  CHECK(s31.name() == "s31");
  CHECK(s31.coefficient_label(0, 0) == "S31");

  const PortSelection h22 = PortSelection::from_name("h22", 4);
  CHECK(h22.tx == (std::vector<int>{0, 1}));
  CHECK(h22.rx == (std::vector<int>{2, 3}));

  MatrixXc m(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = Complex(r, c);
  CHECK(s31.extract(m)(0, 0) == Complex(2, 0));
  CHECK(h22.extract(m)(1, 0) == Complex(3, 0));

  CHECK_THROWS_AS(PortSelection::from_name("s91", 4), std::invalid_argument);
  CHECK_THROWS_AS(PortSelection::from_name("bogus", 4), std::invalid_argument);
}

TEST_CASE("pack/unpack round trip") {
  const CompactModelParams p = sample_compact_params(2, 3, 5);
  const Eigen::VectorXd v = pack_params(p);
  CHECK(v.size() == p.parameter_count());
  const CompactModelParams q = unpack_params(v, 2, 3);
  CHECK(q.alpha_a == p.alpha_a);
  CHECK(q.alpha_1 == p.alpha_1);
  for (std::size_t i = 0; i < p.coupling.size(); ++i) CHECK(q.coupling[i] == p.coupling[i]);
}

TEST_CASE("small closed-loop calibration recovers the hidden model" * doctest::timeout(900)) {
  const int na = 2, ns = 10;
  const GroundTruth truth = GroundTruth::hidden_compact(sample_compact_params(na, ns, 31), 0.0, 31);
  const Dataset data = generate_dataset(truth, 350, 8);

  const PortSelection sel = PortSelection::full(na);
  const PilotSet pilots = PilotSet::gaussian(na, 19);
  const CalibratedModel model = calibrate(data, sel, CostSpec::coherent(), pilots, quick_opts(3));

  // held-out accuracy
  std::vector<MetaConfig> train_cfgs;
  for (const auto& r : data.records) train_cfgs.push_back(r.config);
  const auto eval = random_configs_excluding(ns, 120, 555, train_cfgs);
  std::vector<MatrixXc> t, p;
  for (const auto& c : eval) {
    t.push_back(truth.measure(c).entries);
    p.push_back(model.predict(c));
  }
  const ZetaReport rep = zeta_report(sel, t, p);
  for (double z : rep.zeta) CHECK(z >= 25.0);

  // best validation cost equals the minimum of the trace
  double best = model.report.trace.front().validation_cost;
  for (const auto& row : model.report.trace) best = std::min(best, row.validation_cost);
  CHECK(model.report.best_validation_cost == best);
}

TEST_CASE("calibration is deterministic for a fixed seed") {
  const GroundTruth truth = GroundTruth::hidden_compact(sample_compact_params(1, 3, 7), 0.0, 7);
  const Dataset data = generate_dataset(truth, 60, 3);
  TrainOptions o = quick_opts(11);
  o.max_iterations = 300;
  o.patience_iters = 10000;
  const PortSelection sel = PortSelection::full(1);
  const PilotSet pilots = PilotSet::gaussian(1, 2);
  const CalibratedModel a = calibrate(data, sel, CostSpec::coherent(), pilots, o);
  const CalibratedModel b = calibrate(data, sel, CostSpec::coherent(), pilots, o);
  CHECK((pack_params(a.params).array() == pack_params(b.params).array()).all());
  CHECK(a.report.best_validation_cost == b.report.best_validation_cost);
}

TEST_CASE("calibration guards") {
  const GroundTruth truth = GroundTruth::hidden_compact(sample_compact_params(2, 3, 9), 0.0, 9);
  Dataset data = generate_dataset(truth, 20, 4, true);  // phaseless records
  const PortSelection sel = PortSelection::full(2);
  const PilotSet pilots = PilotSet::gaussian(2, 2);

  // coherent cost on phaseless records
  CHECK_THROWS_AS(calibrate(data, sel, CostSpec::coherent(), pilots, quick_opts(1)),
                  std::invalid_argument);
  // phaseless cost with non-canonical pilots on magnitude-only storage
  CHECK_THROWS_AS(calibrate(data, sel, CostSpec::phaseless(), pilots, quick_opts(1)),
                  std::invalid_argument);

  Dataset empty;
  empty.header = data.header;
  CHECK_THROWS_AS(calibrate(empty, sel, CostSpec::phaseless(), pilots, quick_opts(1)),
                  std::invalid_argument);

  // smaller than one batch: runs full-batch and still returns a model
  Dataset tiny = generate_dataset(truth, 12, 4);
  TrainOptions o = quick_opts(2);
  o.batch_size = 1000;
  o.max_iterations = 40;
  o.patience_iters = 10000;
  const CalibratedModel m = calibrate(tiny, sel, CostSpec::coherent(), pilots, o);
  CHECK(m.report.iterations == 40);
}

TEST_CASE("masked calibration uses the dataset mask") {
  const GroundTruth truth = GroundTruth::hidden_compact(sample_compact_params(2, 3, 13), 0.0, 13);
  MaskArray mask = MaskArray::Constant(2, 2, true);
  mask(1, 1) = false;
  const Dataset data = generate_dataset(truth, 80, 6, false, mask);
  TrainOptions o = quick_opts(5);
  o.max_iterations = 200;
  o.patience_iters = 10000;
  const CalibratedModel m = calibrate(data, PortSelection::full(2), CostSpec::masked({}),
                                      PilotSet::gaussian(2, 3), o);
  CHECK(m.cost.kind == CostKind::masked);
  REQUIRE(m.cost.mask.size() == 4);
  CHECK_FALSE(m.cost.mask(1, 1));
}

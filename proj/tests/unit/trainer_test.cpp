#include "asaukit/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "asaukit/datasets.hpp"
#include "asaukit/error.hpp"

namespace asaukit {
namespace {

Network mlp(const ActivationSpec& act, std::uint64_t seed, std::size_t in = 2, std::size_t hidden = 16, std::size_t k = 2) {
  return Network({in}, {DenseSpec{in, hidden}, ActivationLayerSpec{act}, DenseSpec{hidden, k}}, seed);
}

TrainConfig quick_config() {
  TrainConfig c;
  c.max_epochs = 200;
  c.batch_size = 16;
  c.lr = 1e-2;
  c.patience = 50;
  c.seed = 3;
  return c;
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.patience = 0;
  EXPECT_THROW(c.validate(), PreconditionError);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), PreconditionError);
  c = {};
  c.split = {0.5, 0.3, 0.3};
  EXPECT_THROW(c.validate(), PreconditionError);
  c = {};
  c.lr = 0;
  EXPECT_THROW(c.validate(), PreconditionError);
}

TEST(TrainLoop, PatienceOneOnConstantProblemStopsAfterTwoEpochs) {
  // No parameters: the validation metric can never change.
  Network net({2}, {ActivationLayerSpec{BaselineActivation{}}});
  const auto data = split_dataset(gen_blobs(40, 2, 0.5, 1), SplitSpec{{0.8, 0.1, 0.1}, 1});
  TrainConfig c = quick_config();
  c.patience = 1;
  const auto r = train_loop(net, data, c);
  EXPECT_EQ(r.history.size(), 2u);
  EXPECT_TRUE(r.stopped_early);
  EXPECT_EQ(r.best_epoch, 1);
}

TEST(TrainLoop, SeparableBlobsReachHighAccuracy) {
  const auto data = split_dataset(gen_blobs(400, 2, 0.5, 11), SplitSpec{{0.8, 0.1, 0.1}, 12});
  for (const ActivationSpec& act : {ActivationSpec{BaselineActivation{}}, ActivationSpec{AsauActivation{}}}) {
    Network net = mlp(act, 5);
    const auto r = train_loop(net, data, quick_config());
    EXPECT_LE(r.history.size(), 200u);
    EXPECT_FALSE(r.diverged);
    EXPECT_GE(evaluate_accuracy(net, data.test), 0.95) << activation_label(act);
  }
}

TEST(TrainLoop, DeterministicHistory) {
  const auto data = split_dataset(gen_two_moons(200, 0.1, 4), SplitSpec{{0.8, 0.1, 0.1}, 5});
  TrainConfig c = quick_config();
  c.max_epochs = 15;
  Network a = mlp(AsauActivation{}, 9);
  Network b = mlp(AsauActivation{}, 9);
  const auto ra = train_loop(a, data, c);
  const auto rb = train_loop(b, data, c);
  ASSERT_EQ(ra.history.size(), rb.history.size());
  for (std::size_t i = 0; i < ra.history.size(); ++i) {
    EXPECT_EQ(ra.history[i].train_loss, rb.history[i].train_loss);
    EXPECT_EQ(ra.history[i].val_metric, rb.history[i].val_metric);
  }
  EXPECT_EQ(std::vector<double>(a.params().values().begin(), a.params().values().end()),
            std::vector<double>(b.params().values().begin(), b.params().values().end()));
}

TEST(TrainLoop, ReturnsBestValidationModel) {
  const auto data = split_dataset(gen_two_moons(200, 0.3, 6), SplitSpec{{0.8, 0.1, 0.1}, 7});
  TrainConfig c = quick_config();
  c.max_epochs = 40;
  c.patience = 10;
  Network net = mlp(BaselineActivation{}, 2);
  const auto r = train_loop(net, data, c);
  double best = -1.0;
  for (const auto& e : r.history) best = std::max(best, e.val_metric);
  EXPECT_EQ(r.best_val_metric, best);
  EXPECT_EQ(r.history[r.best_epoch - 1].val_metric, best);
  EXPECT_EQ(evaluate_accuracy(net, data.val), best);
}

TEST(TrainLoop, AsauGainsStayAboveFloor) {
  const auto data = split_dataset(gen_two_moons(100, 0.1, 8), SplitSpec{{0.8, 0.1, 0.1}, 8});
  TrainConfig c = quick_config();
  c.max_epochs = 30;
  c.lr = 0.5;
  Network net = mlp(AsauActivation{AsauParams(0, 1, 0.01, 0.01), {}, Granularity::per_layer, 0}, 3);
  train_loop(net, data, c);
  EXPECT_GE(net.params().values()[*net.params().find("layer1.asau.alpha")], kAsauGainFloor);
  EXPECT_GE(net.params().values()[*net.params().find("layer1.asau.beta")], kAsauGainFloor);
}

TEST(TrainLoop, DivergenceIsReported) {
  const auto data = split_dataset(gen_two_moons(100, 0.1, 8), SplitSpec{{0.8, 0.1, 0.1}, 8});
  TrainConfig c = quick_config();
  c.max_epochs = 50;
  c.lr = 1e300;
  c.weight_decay = 0.0;
  Network net = mlp(BaselineActivation{}, 3);
  const auto r = train_loop(net, data, c);
  EXPECT_TRUE(r.diverged);
  EXPECT_LT(r.history.size(), 50u);
}

TEST(TrainLoop, EmptySplitIsRejected) {
  auto data = split_dataset(gen_two_moons(20, 0.1, 1), SplitSpec{{0.8, 0.1, 0.1}, 1});
  data.val = LabeledSet{Tensor(), {}, 2};
  Network net = mlp(BaselineActivation{}, 1);
  EXPECT_THROW(train_loop(net, data, quick_config()), PreconditionError);
}

TEST(TrainLoop, SegmentationRunsDeterministically) {
  const auto data = split_dataset(gen_shapes_seg(20, 16, 16, 3), SplitSpec{{0.8, 0.1, 0.1}, 3});
  const std::vector<LayerSpec> layers{Conv2dSpec{1, 4}, ActivationLayerSpec{AsauActivation{}}, MaxPool2x2Spec{},
                                      Upsample2xSpec{}, Conv2dSpec{4, 1}};
  TrainConfig c = quick_config();
  c.max_epochs = 4;
  c.batch_size = 4;
  Network a({1, 16, 16}, layers, 1);
  Network b({1, 16, 16}, layers, 1);
  const auto ra = train_loop(a, data, c);
  const auto rb = train_loop(b, data, c, MaskLoss::bce_dice);
  ASSERT_EQ(ra.history.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_TRUE(std::isfinite(ra.history[i].train_loss));
    EXPECT_EQ(ra.history[i].train_loss, rb.history[i].train_loss);
    EXPECT_GE(ra.history[i].val_metric, 0.0);
    EXPECT_LE(ra.history[i].val_metric, 1.0);
  }
  EXPECT_EQ(evaluate_mean_dice(a, data.val), ra.best_val_metric);
}

TEST(History, CsvLayout) {
  std::ostringstream s;
  write_history_csv(s, {{1, 0.5, 0.25}, {2, 0.125, 1.0}});
  EXPECT_EQ(s.str(), "epoch,train_loss,val_metric\n1,0.5,0.25\n2,0.125,1\n");
}

}  // namespace
}  // namespace asaukit

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "tactsim/nn/distributions.hpp"
#include "tactsim/nn/gradcheck.hpp"
#include "tactsim/nn/layers.hpp"
#include "tactsim/nn/mlp.hpp"
#include "tactsim/nn/params.hpp"
#include "tactsim/nn/tensor.hpp"
#include "tactsim/nn/train.hpp"

using namespace tactsim;

namespace {

Tensor random_tensor(std::vector<std::int64_t> shape, Rng& rng, double scale = 1.0) {
    Tensor t(std::move(shape));
    for (auto& v : t.v) v = rng.normal() * scale;
    return t;
}

// mean-squared loss plus its gradient wrt the prediction
double mse_with_grad(const Tensor& pred, const Tensor& target, Tensor& dpred) {
    dpred = Tensor(pred.shape);
    const double n = double(pred.v.size());
    double acc = 0;
    for (std::size_t i = 0; i < pred.v.size(); ++i) {
        const double d = pred.v[i] - target.v[i];
        acc += d * d;
        dpred.v[i] = 2.0 * d / n;
    }
    return acc / n;
}

template <typename LossFn, typename BackFn>
GradCheckReport param_gradcheck(ParamStore& store, LossFn&& loss, BackFn&& back,
                                std::size_t max_checks = 512) {
    store.zero_grad();
    back();
    std::vector<double> analytic = store.grads;
    return check_gradients(store.values, loss, analytic, max_checks);
}

}  // namespace

TEST_CASE("dense layer matches explicit matrix product") {
    ParamStore store;
    Rng rng(11);
    Dense dense(store, "d", 3, 2, rng);

    const double* w = store.value_ptr("d.w");  // row-major {out, in}
    const double* b = store.value_ptr("d.b");
    Tensor x({3});
    x.v = {0.5, -1.25, 2.0};
    Tensor y = dense.forward(x);
    REQUIRE(y.v.size() == 2);
    for (int o = 0; o < 2; ++o) {
        double want = b[o];
        for (int i = 0; i < 3; ++i) want += w[o * 3 + i] * x.v[std::size_t(i)];
        REQUIRE(y.v[std::size_t(o)] == Catch::Approx(want).margin(1e-12));
    }
}

TEST_CASE("dense gradients match finite differences") {
    ParamStore store;
    Rng rng(21);
    Dense dense(store, "d", 5, 4, rng);

    Tensor x = random_tensor({5}, rng);
    Tensor target = random_tensor({4}, rng);

    auto report = param_gradcheck(
        store,
        [&]() {
            Tensor dpred;
            return mse_with_grad(dense.forward(x), target, dpred);
        },
        [&]() {
            Tensor dpred;
            mse_with_grad(dense.forward(x), target, dpred);
            dense.backward(dpred);
        });
    INFO("worst index " << report.worst_index << " analytic " << report.worst_analytic
                        << " numeric " << report.worst_numeric);
    REQUIRE(report.max_rel_err < 1e-6);
}

TEST_CASE("dense input gradient matches finite differences") {
    ParamStore store;
    Rng rng(31);
    Dense dense(store, "d", 4, 3, rng);

    Tensor x = random_tensor({4}, rng);
    Tensor target = random_tensor({3}, rng);

    Tensor dpred;
    mse_with_grad(dense.forward(x), target, dpred);
    store.zero_grad();
    Tensor dx = dense.backward(dpred);

    const double eps = 1e-6;
    for (std::size_t i = 0; i < x.v.size(); ++i) {
        Tensor xp = x, xm = x;
        xp.v[i] += eps;
        xm.v[i] -= eps;
        Tensor scratch;
        const double lp = mse_with_grad(dense.forward(xp), target, scratch);
        const double lm = mse_with_grad(dense.forward(xm), target, scratch);
        REQUIRE(dx.v[i] == Catch::Approx((lp - lm) / (2 * eps)).margin(1e-7));
    }
}

TEST_CASE("conv2d matches direct convolution") {
    ParamStore store;
    Rng rng(41);
    Conv2d conv(store, "c", 2, 3, 3, 1, 1, rng);  // cin=2 cout=3 k=3 stride=1 pad=1

    Tensor x = random_tensor({2, 5, 4}, rng);
    Tensor y = conv.forward(x);
    REQUIRE(y.shape == std::vector<std::int64_t>{3, 5, 4});

    const double* w = store.value_ptr("c.w");  // {cout, cin, k, k} row-major
    const double* b = store.value_ptr("c.b");
    for (int co = 0; co < 3; ++co)
        for (int oy = 0; oy < 5; ++oy)
            for (int ox = 0; ox < 4; ++ox) {
                double want = b[co];
                for (int ci = 0; ci < 2; ++ci)
                    for (int ky = 0; ky < 3; ++ky)
                        for (int kx = 0; kx < 3; ++kx) {
                            const int iy = oy + ky - 1;
                            const int ix = ox + kx - 1;
                            if (iy < 0 || iy >= 5 || ix < 0 || ix >= 4) continue;
                            want += w[((co * 2 + ci) * 3 + ky) * 3 + kx] * x.at3(ci, iy, ix);
                        }
                REQUIRE(y.at3(co, oy, ox) == Catch::Approx(want).margin(1e-10));
            }
}

TEST_CASE("conv2d strided gradients match finite differences") {
    ParamStore store;
    Rng rng(51);
    Conv2d conv(store, "c", 3, 4, 3, 2, 1, rng);  // stride 2

    Tensor x = random_tensor({3, 6, 8}, rng);
    Tensor target = random_tensor(conv.forward(x).shape, rng);

    auto report = param_gradcheck(
        store,
        [&]() {
            Tensor dpred;
            return mse_with_grad(conv.forward(x), target, dpred);
        },
        [&]() {
            Tensor dpred;
            mse_with_grad(conv.forward(x), target, dpred);
            conv.backward(dpred);
        });
    INFO("worst index " << report.worst_index << " analytic " << report.worst_analytic
                        << " numeric " << report.worst_numeric);
    REQUIRE(report.max_rel_err < 1e-6);
}

TEST_CASE("conv2d input gradient matches finite differences") {
    ParamStore store;
    Rng rng(61);
    Conv2d conv(store, "c", 2, 2, 3, 2, 1, rng);

    Tensor x = random_tensor({2, 5, 5}, rng);
    Tensor target = random_tensor(conv.forward(x).shape, rng);

    Tensor dpred;
    mse_with_grad(conv.forward(x), target, dpred);
    store.zero_grad();
    Tensor dx = conv.backward(dpred);

    const double eps = 1e-6;
    for (std::size_t i = 0; i < x.v.size(); i += 7) {  // subsample
        Tensor xp = x, xm = x;
        xp.v[i] += eps;
        xm.v[i] -= eps;
        Tensor scratch;
        const double lp = mse_with_grad(conv.forward(xp), target, scratch);
        const double lm = mse_with_grad(conv.forward(xm), target, scratch);
        REQUIRE(dx.v[i] == Catch::Approx((lp - lm) / (2 * eps)).margin(1e-7));
    }
}

TEST_CASE("upsample2d repeats pixels and routes gradients") {
    Upsample2d up(3);
    Tensor x({1, 2, 2});
    x.v = {1.0, 2.0, 3.0, 4.0};
    Tensor y = up.forward(x);
    REQUIRE(y.shape == std::vector<std::int64_t>{1, 6, 6});
    REQUIRE(y.at3(0, 0, 0) == 1.0);
    REQUIRE(y.at3(0, 2, 2) == 1.0);
    REQUIRE(y.at3(0, 0, 3) == 2.0);
    REQUIRE(y.at3(0, 5, 5) == 4.0);

    Tensor dy(y.shape);
    dy.fill(1.0);
    Tensor dx = up.backward(dy);
    for (auto v : dx.v) REQUIRE(v == 9.0);
}

TEST_CASE("activation backward rules match finite differences") {
    Rng rng(71);
    Tensor x = random_tensor({40}, rng);
    const double eps = 1e-6;

    SECTION("relu") {
        Tensor dy(x.shape);
        dy.fill(1.0);
        relu_backward(x, dy);
        for (std::size_t i = 0; i < x.v.size(); ++i) {
            if (std::abs(x.v[i]) < 1e-3) continue;  // kink
            const double numeric =
                (std::max(x.v[i] + eps, 0.0) - std::max(x.v[i] - eps, 0.0)) / (2 * eps);
            REQUIRE(dy.v[i] == Catch::Approx(numeric).margin(1e-9));
        }
    }
    SECTION("tanh") {
        Tensor y = x;
        tanh_forward(y);
        Tensor dy(x.shape);
        dy.fill(1.0);
        tanh_backward(y, dy);
        for (std::size_t i = 0; i < x.v.size(); ++i) {
            const double numeric =
                (std::tanh(x.v[i] + eps) - std::tanh(x.v[i] - eps)) / (2 * eps);
            REQUIRE(dy.v[i] == Catch::Approx(numeric).margin(1e-8));
        }
    }
    SECTION("elu") {
        auto f = [](double v) { return v > 0 ? v : std::expm1(v); };
        Tensor y = x;
        elu_forward(y);
        Tensor dy(x.shape);
        dy.fill(1.0);
        elu_backward(y, dy);
        for (std::size_t i = 0; i < x.v.size(); ++i) {
            if (std::abs(x.v[i]) < 1e-3) continue;
            const double numeric = (f(x.v[i] + eps) - f(x.v[i] - eps)) / (2 * eps);
            REQUIRE(dy.v[i] == Catch::Approx(numeric).margin(1e-8));
        }
    }
}

TEST_CASE("dropout is identity at eval and inverted-scaled at train") {
    Rng rng(81);
    Dropout drop(0.4);
    Tensor x({2000});
    x.fill(1.0);

    Tensor eval_out = drop.forward(x, false, rng);
    REQUIRE(eval_out.v == x.v);

    Tensor train_out = drop.forward(x, true, rng);
    double mean = 0;
    std::size_t zeros = 0;
    for (auto v : train_out.v) {
        mean += v;
        if (v == 0.0)
            ++zeros;
        else
            REQUIRE(v == Catch::Approx(1.0 / 0.6).margin(1e-12));
    }
    mean /= double(train_out.v.size());
    REQUIRE(double(zeros) / double(x.v.size()) == Catch::Approx(0.4).margin(0.05));
    REQUIRE(mean == Catch::Approx(1.0).margin(0.06));

    // frozen mode reuses the last mask so finite differences see a fixed net
    drop.freeze(true);
    Tensor again = drop.forward(x, true, rng);
    REQUIRE(again.v == train_out.v);
    drop.freeze(false);
}

TEST_CASE("mlp gradients match finite differences with frozen dropout") {
    ParamStore store;
    Rng rng(91);
    Mlp mlp(store, "m", 6, {8, 7}, 5, {0.2, 0.4}, rng);

    Tensor x = random_tensor({6}, rng);
    Tensor target = random_tensor({5}, rng);

    Rng drop_rng(17);
    mlp.forward(x, true, drop_rng);  // draw masks once
    mlp.freeze_dropout(true);

    Rng unused(0);
    auto report = param_gradcheck(
        store,
        [&]() {
            Tensor dpred;
            return mse_with_grad(mlp.forward(x, true, unused), target, dpred);
        },
        [&]() {
            Tensor dpred;
            mse_with_grad(mlp.forward(x, true, unused), target, dpred);
            mlp.backward(dpred);
        });
    INFO("worst index " << report.worst_index << " analytic " << report.worst_analytic
                        << " numeric " << report.worst_numeric);
    REQUIRE(report.max_rel_err < 1e-6);
    mlp.freeze_dropout(false);
}

TEST_CASE("kl divergence closed form") {
    SECTION("standard normal has zero divergence") {
        Posterior q;
        q.mean.assign(37, 0.0);
        q.log_variance.assign(37, 0.0);
        REQUIRE(kl_divergence(q) == 0.0);
    }
    SECTION("unit mean at unit variance gives half per dimension") {
        for (std::size_t dim : {std::size_t(128), std::size_t(256)}) {
            Posterior q;
            q.mean.assign(dim, 1.0);
            q.log_variance.assign(dim, 0.0);
            REQUIRE(kl_divergence(q) == Catch::Approx(0.5 * double(dim)).margin(1e-10));
        }
    }
    SECTION("matches elementwise summation on random posteriors") {
        Rng rng(101);
        Posterior q;
        for (int i = 0; i < 200; ++i) {
            q.mean.push_back(rng.normal());
            q.log_variance.push_back(rng.normal() * 0.5);
        }
        double want = 0;
        for (std::size_t i = 0; i < q.mean.size(); ++i)
            want += -0.5 * (1.0 + q.log_variance[i] - q.mean[i] * q.mean[i] -
                            std::exp(q.log_variance[i]));
        REQUIRE(kl_divergence(q) == Catch::Approx(want).margin(1e-10));
    }
}

TEST_CASE("kl gradient matches finite differences") {
    Rng rng(111);
    Posterior q;
    for (int i = 0; i < 20; ++i) {
        q.mean.push_back(rng.normal());
        q.log_variance.push_back(rng.normal() * 0.5);
    }
    const double weight = 0.37;
    std::vector<double> dmu, dlv;
    kl_backward(q, weight, dmu, dlv);

    const double eps = 1e-6;
    for (std::size_t i = 0; i < q.mean.size(); ++i) {
        Posterior qp = q, qm = q;
        qp.mean[i] += eps;
        qm.mean[i] -= eps;
        REQUIRE(dmu[i] ==
                Catch::Approx(weight * (kl_divergence(qp) - kl_divergence(qm)) / (2 * eps))
                    .margin(1e-8));
        qp = q;
        qm = q;
        qp.log_variance[i] += eps;
        qm.log_variance[i] -= eps;
        REQUIRE(dlv[i] ==
                Catch::Approx(weight * (kl_divergence(qp) - kl_divergence(qm)) / (2 * eps))
                    .margin(1e-8));
    }
}

TEST_CASE("reparameterization collapses to the mean at tiny variance") {
    Posterior q;
    q.mean = {1.5, -2.0, 0.25};
    q.log_variance = {-100.0, kCollapsedLogVar, -90.0};
    Rng rng(121);
    auto s = reparameterize(q, rng);
    REQUIRE(s.z == q.mean);
    for (auto e : s.eps) REQUIRE(e == 0.0);
}

TEST_CASE("reparameterized samples follow the posterior moments") {
    Posterior q;
    q.mean = {2.0};
    q.log_variance = {std::log(0.25)};
    Rng rng(131);
    double acc = 0, acc2 = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        auto s = reparameterize(q, rng);
        acc += s.z[0];
        acc2 += s.z[0] * s.z[0];
    }
    const double mean = acc / n;
    const double var = acc2 / n - mean * mean;
    REQUIRE(mean == Catch::Approx(2.0).margin(0.02));
    REQUIRE(var == Catch::Approx(0.25).margin(0.02));
}

TEST_CASE("reparameterization gradient matches finite differences") {
    Posterior q;
    q.mean = {0.5, -1.0, 2.0};
    q.log_variance = {0.3, -0.4, 0.1};
    Rng rng(141);
    auto s = reparameterize(q, rng);
    // loss = sum z_i^2
    std::vector<double> dz = {2 * s.z[0], 2 * s.z[1], 2 * s.z[2]};
    std::vector<double> dmu(3, 0.0), dlv(3, 0.0);
    reparameterize_backward(q, s, dz, dmu, dlv);

    const double eps = 1e-6;
    auto loss_of = [&](const Posterior& p) {
        double acc = 0;
        for (std::size_t i = 0; i < p.mean.size(); ++i) {
            const double z = p.mean[i] + std::exp(0.5 * p.log_variance[i]) * s.eps[i];
            acc += z * z;
        }
        return acc;
    };
    for (std::size_t i = 0; i < 3; ++i) {
        Posterior qp = q, qm = q;
        qp.mean[i] += eps;
        qm.mean[i] -= eps;
        REQUIRE(dmu[i] == Catch::Approx((loss_of(qp) - loss_of(qm)) / (2 * eps)).margin(1e-7));
        qp = q;
        qm = q;
        qp.log_variance[i] += eps;
        qm.log_variance[i] -= eps;
        REQUIRE(dlv[i] == Catch::Approx((loss_of(qp) - loss_of(qm)) / (2 * eps)).margin(1e-7));
    }
}

TEST_CASE("gaussian vae loss composes mse and weighted kl") {
    Tensor x({4});
    x.v = {0.5, -0.5, 1.0, 0.0};
    Tensor recon = x;
    Posterior q;
    q.mean.assign(256, 1.0);
    q.log_variance.assign(256, 0.0);
    auto parts = vae_gaussian_loss(x, recon, q, 0.001);
    REQUIRE(parts.mse == 0.0);
    REQUIRE(parts.kl == Catch::Approx(128.0).margin(1e-10));
    REQUIRE(parts.total == Catch::Approx(0.128).margin(1e-12));

    recon.v[0] += 2.0;  // mse = 4/4 = 1
    parts = vae_gaussian_loss(x, recon, q, 0.001);
    REQUIRE(parts.mse == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(parts.total == Catch::Approx(1.128).margin(1e-10));
}

TEST_CASE("adam minimizes a quadratic") {
    ParamStore store;
    store.add("theta", {4});
    double* theta = store.value_ptr("theta");
    const double target[4] = {1.0, -2.0, 0.5, 3.0};

    Adam opt(store.size(), 0.05, 0.0);
    for (int step = 0; step < 400; ++step) {
        store.zero_grad();
        double* g = store.grad_ptr("theta");
        for (int i = 0; i < 4; ++i) g[i] = 2.0 * (theta[i] - target[i]);
        opt.step(store);
    }
    for (int i = 0; i < 4; ++i) REQUIRE(theta[i] == Catch::Approx(target[i]).margin(1e-3));
}

TEST_CASE("adam weight decay shrinks parameters under zero gradient") {
    ParamStore store;
    store.add("theta", {1});
    double* theta = store.value_ptr("theta");
    theta[0] = 1.0;
    Adam opt(store.size(), 0.01, 0.1);
    for (int step = 0; step < 50; ++step) {
        store.zero_grad();
        opt.step(store);
    }
    REQUIRE(std::abs(theta[0]) < 1.0);
    REQUIRE(theta[0] > 0.0);
}

namespace {

struct LineFit {
    ParamStore store;
    std::vector<double> xs, ys;

    LineFit(std::size_t n, unsigned seed) {
        store.add("ab", {2});
        Rng rng(seed);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = rng.uniform(-1.0, 1.0);
            xs.push_back(x);
            ys.push_back(3.0 * x - 0.5);
        }
    }

    double batch(const std::vector<std::size_t>& idx) {
        double* ab = store.value_ptr("ab");
        double* g = store.grad_ptr("ab");
        double loss = 0;
        for (auto i : idx) {
            const double pred = ab[0] * xs[i] + ab[1];
            const double d = pred - ys[i];
            loss += d * d;
            g[0] += 2.0 * d * xs[i] / double(idx.size());
            g[1] += 2.0 * d / double(idx.size());
        }
        return loss / double(idx.size());
    }

    double full_loss() {
        double* ab = store.value_ptr("ab");
        double loss = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double d = ab[0] * xs[i] + ab[1] - ys[i];
            loss += d * d;
        }
        return loss / double(xs.size());
    }
};

}  // namespace

TEST_CASE("training loop fits a line and reports its history") {
    LineFit fit(64, 5);
    TrainSettings settings;
    settings.max_epochs = 200;
    settings.patience = 50;
    settings.batch_size = 16;
    settings.lr = 0.05;

    auto result = run_training(
        fit.store, settings, fit.xs.size(),
        [&](const std::vector<std::size_t>& idx, std::int64_t, Rng&) { return fit.batch(idx); },
        [&](std::int64_t) { return fit.full_loss(); }, 99);

    REQUIRE(std::int64_t(result.train_losses.size()) == result.epochs_run);
    REQUIRE(std::int64_t(result.val_losses.size()) == result.epochs_run);
    REQUIRE(result.best_val_loss < 1e-4);
    const double* ab = fit.store.value_ptr("ab");
    REQUIRE(ab[0] == Catch::Approx(3.0).margin(0.01));
    REQUIRE(ab[1] == Catch::Approx(-0.5).margin(0.01));
}

TEST_CASE("training for zero epochs leaves parameters untouched") {
    LineFit fit(16, 6);
    double* ab = fit.store.value_ptr("ab");
    ab[0] = 1.25;
    ab[1] = -4.0;
    TrainSettings settings;
    settings.max_epochs = 0;
    auto result = run_training(
        fit.store, settings, fit.xs.size(),
        [&](const std::vector<std::size_t>& idx, std::int64_t, Rng&) { return fit.batch(idx); },
        [&](std::int64_t) { return fit.full_loss(); }, 99);
    REQUIRE(result.epochs_run == 0);
    REQUIRE(ab[0] == 1.25);
    REQUIRE(ab[1] == -4.0);
}

TEST_CASE("training restores the best parameters after patience runs out") {
    LineFit fit(32, 7);
    TrainSettings settings;
    settings.max_epochs = 500;
    settings.patience = 5;
    settings.batch_size = 8;
    settings.lr = 0.05;

    // a validation curve that punishes later epochs forces early stop + restore
    std::vector<double> snapshot;
    auto result = run_training(
        fit.store, settings, fit.xs.size(),
        [&](const std::vector<std::size_t>& idx, std::int64_t, Rng&) { return fit.batch(idx); },
        [&](std::int64_t epoch) {
            if (epoch == 2) {
                const double* ab = fit.store.value_ptr("ab");
                snapshot = {ab[0], ab[1]};
            }
            return epoch <= 2 ? 1.0 - 0.1 * double(epoch) : 5.0;
        },
        99);
    REQUIRE(result.epochs_run < 500);
    REQUIRE(result.best_epoch == 2);
    const double* ab = fit.store.value_ptr("ab");
    REQUIRE(ab[0] == snapshot[0]);
    REQUIRE(ab[1] == snapshot[1]);
}

TEST_CASE("training with the same seed reproduces identical parameters") {
    auto run_once = [] {
        LineFit fit(48, 8);
        TrainSettings settings;
        settings.max_epochs = 20;
        settings.patience = 50;
        settings.batch_size = 12;
        settings.lr = 0.03;
        run_training(
            fit.store, settings, fit.xs.size(),
            [&](const std::vector<std::size_t>& idx, std::int64_t, Rng& rng) {
                (void)rng.uniform();  // models draw per-epoch noise; keep that path hot
                return fit.batch(idx);
            },
            [&](std::int64_t) { return fit.full_loss(); }, 1234);
        const double* ab = fit.store.value_ptr("ab");
        return std::vector<double>{ab[0], ab[1]};
    };
    REQUIRE(run_once() == run_once());
}

TEST_CASE("training aborts when the loss diverges") {
    LineFit fit(16, 9);
    TrainSettings settings;
    settings.max_epochs = 10;
    REQUIRE_THROWS_MATCHES(
        run_training(
            fit.store, settings, fit.xs.size(),
            [&](const std::vector<std::size_t>&, std::int64_t, Rng&) {
                return std::numeric_limits<double>::quiet_NaN();
            },
            [&](std::int64_t) { return 1.0; }, 99),
        Error, Catch::Matchers::Predicate<Error>(
                   [](const Error& e) { return e.code() == "train/diverged"; }));
}

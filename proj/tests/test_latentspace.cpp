#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "tactsim/core/convert.hpp"
#include "tactsim/imagevae/train.hpp"
#include "tactsim/latentspace/arithmetic.hpp"
#include "tactsim/latentspace/projection.hpp"
#include "tactsim/nn/gradcheck.hpp"

using namespace tactsim;

namespace {

// Dyadic-grid coordinates: sums and differences of such values are exactly
// representable, so the group identities can be asserted bitwise.
LatentVec lattice_vec(LatentSpace s, std::size_t d, Rng& rng) {
    LatentVec z = LatentVec::zeros(s, d);
    for (auto& v : z.values)
        v = double(std::int64_t(rng.below(1 << 21)) - (1 << 20)) / 1024.0;
    return z;
}

LatentVec normal_vec(LatentSpace s, std::size_t d, Rng& rng, double scale = 1.0) {
    LatentVec z = LatentVec::zeros(s, d);
    for (auto& v : z.values) v = rng.normal() * scale;
    return z;
}

ProjectionParams micro_projection() {
    ProjectionParams p;
    p.hidden = {8, 10};
    p.dropout = {0.2, 0.4};
    p.batch_size = 16;
    return p;
}

// z_image = A z_mesh + c_sensor: the image code is a sensor-independent linear
// readout of geometry plus a per-sensor optical offset.
struct ToyWorld {
    std::size_t mesh_dim = 5, image_dim = 7;
    std::vector<std::vector<double>> a;       // image_dim x mesh_dim
    std::map<std::string, LatentVec> offsets;

    explicit ToyWorld(std::uint64_t seed, const std::vector<std::string>& sensors) {
        Rng rng(seed);
        a.assign(image_dim, std::vector<double>(mesh_dim));
        for (auto& row : a)
            for (auto& v : row) v = rng.normal() / std::sqrt(double(mesh_dim));
        for (const auto& s : sensors) {
            LatentVec c = LatentVec::zeros(LatentSpace::Image, image_dim);
            for (auto& v : c.values) v = rng.uniform(-1.5, 1.5);
            offsets.emplace(s, std::move(c));
        }
    }

    LatentPair sample(const std::string& sensor, Rng& rng) const {
        LatentPair p;
        p.sensor_id = sensor;
        p.z_mesh = normal_vec(LatentSpace::Mesh, mesh_dim, rng);
        p.z_image = LatentVec::zeros(LatentSpace::Image, image_dim);
        const LatentVec& c = offsets.at(sensor);
        for (std::size_t i = 0; i < image_dim; ++i) {
            double acc = c.values[i];
            for (std::size_t j = 0; j < mesh_dim; ++j) acc += a[i][j] * p.z_mesh.values[j];
            p.z_image.values[i] = acc;
        }
        return p;
    }

    std::vector<LatentPair> samples(const std::string& sensor, std::size_t n,
                                    std::uint64_t seed) const {
        std::vector<LatentPair> out;
        Rng rng(seed);
        for (std::size_t i = 0; i < n; ++i) out.push_back(sample(sensor, rng));
        return out;
    }
};

}  // namespace

TEST_CASE("latent arithmetic round trips are exact on representable values") {
    Rng rng(90210);
    for (int t = 0; t < 1000; ++t) {
        LatentVec d = lattice_vec(LatentSpace::Image, 16, rng);
        LatentVec b1 = lattice_vec(LatentSpace::Image, 16, rng);
        LatentVec b2 = lattice_vec(LatentSpace::Image, 16, rng);

        LatentVec back = extract_deformation(compose(d, b1), b1);
        REQUIRE(back.values == d.values);

        LatentVec i = lattice_vec(LatentSpace::Image, 16, rng);
        LatentVec again = compose(extract_deformation(i, b1), b1);
        REQUIRE(again.values == i.values);

        // swapping the background moves the composition by exactly b1 - b2
        LatentVec z1 = compose(d, b1), z2 = compose(d, b2);
        for (std::size_t k = 0; k < d.values.size(); ++k)
            REQUIRE(z1.values[k] - z2.values[k] == b1.values[k] - b2.values[k]);
    }
}

TEST_CASE("latent arithmetic matches element-wise reference") {
    Rng rng(7411);
    LatentVec z = normal_vec(LatentSpace::Image, 32, rng);
    LatentVec b = normal_vec(LatentSpace::Image, 32, rng);

    LatentVec d = extract_deformation(z, b);
    LatentVec s = compose(d, b);
    for (std::size_t k = 0; k < z.values.size(); ++k) {
        REQUIRE(d.values[k] == z.values[k] - b.values[k]);
        REQUIRE(s.values[k] == (z.values[k] - b.values[k]) + b.values[k]);
    }
    REQUIRE(d.space == LatentSpace::Image);

    LatentVec self = extract_deformation(z, z);
    for (double v : self.values) REQUIRE(v == 0.0);

    LatentVec zero = LatentVec::zeros(LatentSpace::Image, 32);
    REQUIRE(compose(zero, b).values == b.values);
}

TEST_CASE("scaling by powers of two commutes with composition") {
    Rng rng(550);
    LatentVec d = normal_vec(LatentSpace::Image, 24, rng);
    LatentVec b = normal_vec(LatentSpace::Image, 24, rng);

    for (double alpha : {0.5, 2.0, 4.0}) {
        LatentVec ds = d, bs = b;
        for (auto& v : ds.values) v *= alpha;
        for (auto& v : bs.values) v *= alpha;
        LatentVec lhs = compose(ds, bs);
        LatentVec rhs = compose(d, b);
        for (auto& v : rhs.values) v *= alpha;
        REQUIRE(lhs.values == rhs.values);
    }

    const double alpha = 1.7;  // inexact scale: identity holds to rounding
    LatentVec ds = d, bs = b;
    for (auto& v : ds.values) v *= alpha;
    for (auto& v : bs.values) v *= alpha;
    LatentVec lhs = compose(ds, bs);
    LatentVec rhs = compose(d, b);
    for (std::size_t k = 0; k < lhs.values.size(); ++k)
        REQUIRE(lhs.values[k] == Catch::Approx(alpha * rhs.values[k]).margin(1e-12));
}

TEST_CASE("latent arithmetic rejects mismatched operands") {
    LatentVec img = LatentVec::zeros(LatentSpace::Image, 8);
    LatentVec mesh = LatentVec::zeros(LatentSpace::Mesh, 8);
    LatentVec narrow = LatentVec::zeros(LatentSpace::Image, 4);

    auto code_is = [](const std::string& want) {
        return Catch::Matchers::Predicate<Error>(
            [want](const Error& e) { return e.code() == want; });
    };
    REQUIRE_THROWS_MATCHES(extract_deformation(mesh, mesh), Error,
                           code_is("latent/space-mismatch"));
    REQUIRE_THROWS_MATCHES(extract_deformation(img, mesh), Error,
                           code_is("latent/space-mismatch"));
    REQUIRE_THROWS_MATCHES(extract_deformation(img, narrow), Error,
                           code_is("latent/dim-mismatch"));
    REQUIRE_THROWS_MATCHES(compose(mesh, img), Error, code_is("latent/space-mismatch"));
    REQUIRE_THROWS_MATCHES(compose(img, narrow), Error, code_is("latent/dim-mismatch"));
}

TEST_CASE("background vectors are cached posterior means that favor their own sensor") {
    ImageVaeParams p;
    p.height = 12;
    p.width = 16;
    p.blocks = {1, 1};
    p.factors = {2, 2};
    p.widths = {4, 6};
    p.latent = 6;
    p.beta_final = 0.001;
    p.anneal_epochs = 5;

    // two sensors with very different resting appearances
    auto flat_image = [&](double tint) {
        Tensor x({3, p.height, p.width});
        for (std::int64_t c = 0; c < 3; ++c)
            for (std::int64_t y = 0; y < p.height; ++y)
                for (std::int64_t xx = 0; xx < p.width; ++xx)
                    x.at3(c, y, xx) = std::clamp(
                        tint + 0.1 * double(c) + 0.05 * double(xx) / double(p.width - 1),
                        -1.0, 1.0);
        return x;
    };
    std::vector<Tensor> train, val;
    Rng jit(5);
    for (int i = 0; i < 12; ++i) {
        for (double tint : {-0.5, 0.45}) {
            Tensor x = flat_image(tint + jit.uniform(-0.05, 0.05));
            (i < 10 ? train : val).push_back(x);
        }
    }

    ImageVae vae(p, 99);
    TrainSettings settings;
    settings.max_epochs = 30;
    settings.batch_size = 8;
    train_image_vae(vae, train, val, settings, AugmentParams{}, 17);

    SensorProfile pa, pb;
    pa.sensor_id = "a";
    pa.background = tensor_to_image(flat_image(-0.5));
    pb.sensor_id = "b";
    pb.background = tensor_to_image(flat_image(0.45));

    LatentVec za = background_vector(pa, vae);
    REQUIRE(za.space == LatentSpace::Image);
    REQUIRE(std::int64_t(za.dim()) == p.latent);
    REQUIRE(pa.z_base.has_value());
    REQUIRE(background_vector(pa, vae).values == za.values);  // cached, stable

    LatentVec zb = background_vector(pb, vae);
    Tensor bg_a = image_to_tensor(pa.background);
    const double own = mse(image_to_tensor(decode_image(vae, za)), bg_a);
    const double other = mse(image_to_tensor(decode_image(vae, zb)), bg_a);
    REQUIRE(own < other);

    SensorProfile empty;
    REQUIRE_THROWS_MATCHES(background_vector(empty, vae), Error,
                           Catch::Matchers::Predicate<Error>([](const Error& e) {
                               return e.code() == "profile/no-background";
                           }));
}

TEST_CASE("projection with zeroed weights returns the output bias") {
    Projection proj(ProjectionDirection::MeshToImage, PipelineMode::Split, 5, 7,
                    micro_projection(), 3);
    std::fill(proj.store.values.begin(), proj.store.values.end(), 0.0);
    double* b = proj.store.value_ptr("proj.out.b");
    for (int i = 0; i < 7; ++i) b[i] = 0.25 * (i + 1);

    LatentVec z = LatentVec::zeros(LatentSpace::Mesh, 5);
    z.values = {1.0, -2.0, 0.5, 3.0, -1.0};
    LatentVec out = project_mesh_to_image(proj, z);
    REQUIRE(out.space == LatentSpace::Image);
    REQUIRE(out.dim() == 7);
    for (int i = 0; i < 7; ++i)
        REQUIRE(out.values[std::size_t(i)] == Catch::Approx(0.25 * (i + 1)).margin(1e-15));
}

TEST_CASE("projection inference matches a hand-rolled forward pass") {
    const std::int64_t mesh_dim = 5, image_dim = 7;
    ProjectionParams params = micro_projection();
    Projection proj(ProjectionDirection::ImageToMesh, PipelineMode::NoSplit, mesh_dim,
                    image_dim, params, 12);

    Rng rng(64);
    LatentVec z = normal_vec(LatentSpace::Image, std::size_t(image_dim), rng);

    // independent evaluation straight from the stored weights
    std::vector<double> h = z.values;
    std::vector<std::string> names = {"proj.fc0", "proj.fc1", "proj.out"};
    std::vector<std::int64_t> dims = {image_dim, params.hidden[0], params.hidden[1], mesh_dim};
    for (std::size_t l = 0; l < names.size(); ++l) {
        const double* w = proj.store.value_ptr(names[l] + ".w");
        const double* b = proj.store.value_ptr(names[l] + ".b");
        const std::int64_t in = dims[l], out = dims[l + 1];
        std::vector<double> next(static_cast<std::size_t>(out));
        for (std::int64_t o = 0; o < out; ++o) {
            double acc = b[o];
            for (std::int64_t i = 0; i < in; ++i) acc += w[o * in + i] * h[std::size_t(i)];
            next[std::size_t(o)] =
                l + 1 < names.size() ? (acc > 0.0 ? acc : std::expm1(acc)) : acc;
        }
        h = std::move(next);
    }

    LatentVec out1 = project_image_to_mesh(proj, z);
    REQUIRE(out1.space == LatentSpace::Mesh);
    for (std::size_t i = 0; i < h.size(); ++i)
        REQUIRE(out1.values[i] == Catch::Approx(h[i]).margin(1e-12));

    LatentVec out2 = project_image_to_mesh(proj, z);
    REQUIRE(out1.values == out2.values);  // dropout off: bitwise repeatable
}

TEST_CASE("projection direction and operand guards") {
    Projection m2i(ProjectionDirection::MeshToImage, PipelineMode::Split, 5, 7,
                   micro_projection(), 1);
    Projection i2m(ProjectionDirection::ImageToMesh, PipelineMode::Split, 5, 7,
                   micro_projection(), 1);

    LatentVec zm = LatentVec::zeros(LatentSpace::Mesh, 5);
    LatentVec zi = LatentVec::zeros(LatentSpace::Image, 7);
    auto code_is = [](const std::string& want) {
        return Catch::Matchers::Predicate<Error>(
            [want](const Error& e) { return e.code() == want; });
    };

    REQUIRE_THROWS_MATCHES(project_mesh_to_image(i2m, zm), Error,
                           code_is("projection/direction"));
    REQUIRE_THROWS_MATCHES(project_image_to_mesh(m2i, zi), Error,
                           code_is("projection/direction"));
    REQUIRE_THROWS_MATCHES(m2i.project(zi), Error, code_is("latent/space-mismatch"));
    REQUIRE_THROWS_MATCHES(i2m.project(LatentVec::zeros(LatentSpace::Image, 6)), Error,
                           code_is("latent/dim-mismatch"));

    REQUIRE(parse_pipeline_mode("split") == PipelineMode::Split);
    REQUIRE(parse_pipeline_mode("nosplit") == PipelineMode::NoSplit);
    REQUIRE_THROWS_AS(parse_pipeline_mode("Split"), Error);
    REQUIRE(parse_projection_direction("m2i") == ProjectionDirection::MeshToImage);
    REQUIRE(parse_projection_direction("i2m") == ProjectionDirection::ImageToMesh);
    REQUIRE_THROWS_AS(parse_projection_direction("mesh2image"), Error);
    REQUIRE(std::string(to_string(PipelineMode::Split)) == "split");
    REQUIRE(std::string(to_string(ProjectionDirection::ImageToMesh)) == "i2m");
}

TEST_CASE("projection gradients match finite differences") {
    ProjectionParams params = micro_projection();
    Projection proj(ProjectionDirection::MeshToImage, PipelineMode::Split, 5, 7, params, 8);

    Rng rng(41);
    Tensor x({5}), target({7});
    for (auto& v : x.v) v = rng.normal();
    for (auto& v : target.v) v = rng.normal();

    Rng drop_rng(1234);
    proj.forward(x, true, drop_rng);  // materialize dropout masks
    proj.freeze_dropout(true);

    auto loss = [&]() {
        Rng unused(0);
        Tensor pred = proj.forward(x, true, unused);
        return mse(pred, target);
    };
    proj.store.zero_grad();
    {
        Rng unused(0);
        Tensor pred = proj.forward(x, true, unused);
        Tensor dy = pred;
        for (std::size_t i = 0; i < dy.v.size(); ++i)
            dy.v[i] = 2.0 * (pred.v[i] - target.v[i]) / double(pred.numel());
        proj.backward(dy);
    }
    std::vector<double> analytic = proj.store.grads;
    auto report = check_gradients(proj.store.values, loss, analytic);
    INFO("worst index " << report.worst_index << " analytic " << report.worst_analytic
                        << " numeric " << report.worst_numeric);
    REQUIRE(report.max_rel_err < 1e-4);
}

TEST_CASE("projection training fits the toy map and is reproducible") {
    ToyWorld world(2024, {"s0"});
    auto train = world.samples("s0", 96, 10);
    auto val = world.samples("s0", 24, 11);

    ProjectionParams params = micro_projection();
    TrainSettings settings;
    settings.max_epochs = 80;
    settings.lr = 5e-3;

    auto run = [&]() {
        Projection proj(ProjectionDirection::ImageToMesh, PipelineMode::NoSplit,
                        std::int64_t(world.mesh_dim), std::int64_t(world.image_dim), params, 5);
        TrainResult r = train_projection(proj, train, val, {}, params, settings, 77);
        return std::make_pair(proj.store.values, r.best_val_loss);
    };

    auto [values1, val1] = run();
    auto [values2, val2] = run();
    REQUIRE(values1 == values2);  // same seed, same checkpoint
    REQUIRE(val1 == val2);

    // the map is nearly deterministic, so the fit should be tight
    double var = 0.0;
    for (const auto& pr : val)
        for (double v : pr.z_mesh.values) var += v * v;
    var /= double(val.size() * world.mesh_dim);
    REQUIRE(val1 < 0.2 * var);

    // zero epochs leaves the freshly initialized weights untouched
    Projection proj(ProjectionDirection::ImageToMesh, PipelineMode::NoSplit,
                    std::int64_t(world.mesh_dim), std::int64_t(world.image_dim), params, 5);
    std::vector<double> init = proj.store.values;
    TrainSettings none;
    none.max_epochs = 0;
    train_projection(proj, train, val, {}, params, none, 77);
    REQUIRE(proj.store.values == init);
}

TEST_CASE("background subtraction generalizes to a held-out sensor") {
    std::vector<std::string> sensors = {"s0", "s1", "s2", "s3"};
    ToyWorld world(31337, sensors);

    std::vector<LatentPair> train, val;
    for (int i = 0; i < 3; ++i) {
        auto s = world.samples(sensors[std::size_t(i)], 48, 100 + std::uint64_t(i));
        train.insert(train.end(), s.begin(), s.end());
    }
    val = world.samples("s3", 48, 200);  // never trained on

    ProjectionParams params = micro_projection();
    TrainSettings settings;
    settings.max_epochs = 60;
    settings.lr = 5e-3;

    auto held_out_mse = [&](PipelineMode mode) {
        Projection proj(ProjectionDirection::MeshToImage, mode, std::int64_t(world.mesh_dim),
                        std::int64_t(world.image_dim), params, 9);
        TrainResult r = train_projection(proj, train, val, world.offsets, params, settings, 55);
        return r.best_val_loss;
    };

    const double split = held_out_mse(PipelineMode::Split);
    const double nosplit = held_out_mse(PipelineMode::NoSplit);
    INFO("split " << split << " nosplit " << nosplit);
    REQUIRE(split < nosplit);
}

TEST_CASE("split training demands a background per sensor") {
    ToyWorld world(8, {"s0", "s1"});
    auto train = world.samples("s0", 8, 1);
    auto extra = world.samples("s1", 8, 2);
    train.insert(train.end(), extra.begin(), extra.end());
    auto val = world.samples("s0", 4, 3);

    ProjectionParams params = micro_projection();
    TrainSettings settings;
    settings.max_epochs = 1;

    std::map<std::string, LatentVec> partial;
    partial.emplace("s0", world.offsets.at("s0"));

    Projection proj(ProjectionDirection::MeshToImage, PipelineMode::Split,
                    std::int64_t(world.mesh_dim), std::int64_t(world.image_dim), params, 2);
    REQUIRE_THROWS_MATCHES(
        train_projection(proj, train, val, partial, params, settings, 4), Error,
        Catch::Matchers::Predicate<Error>(
            [](const Error& e) { return e.code() == "projection/missing-background"; }));

    // NOSPLIT never touches the background table
    Projection plain(ProjectionDirection::MeshToImage, PipelineMode::NoSplit,
                     std::int64_t(world.mesh_dim), std::int64_t(world.image_dim), params, 2);
    REQUIRE_NOTHROW(train_projection(plain, train, val, {}, params, settings, 4));
}

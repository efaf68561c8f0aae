#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "tactsim/core/dataset.hpp"
#include "tactsim/core/error.hpp"
#include "tactsim/core/io.hpp"
#include "tactsim/core/rng.hpp"
#include "tactsim/core/split.hpp"
#include "tactsim/core/types.hpp"

using namespace tactsim;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("tactsim_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string error_code(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

}  // namespace

TEST_CASE("rng streams are deterministic and well distributed") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.uniform() == b.uniform());

    Rng c(7);
    double sum = 0;
    for (int i = 0; i < 100000; ++i) {
        double u = c.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    double mean = sum / 100000;
    REQUIRE(mean > 0.49);
    REQUIRE(mean < 0.51);

    Rng d(9);
    double nsum = 0, nsq = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double x = d.normal();
        nsum += x;
        nsq += x * x;
    }
    REQUIRE(std::abs(nsum / n) < 0.02);
    REQUIRE(std::abs(nsq / n - 1.0) < 0.03);

    Rng e(3);
    for (int i = 0; i < 1000; ++i) REQUIRE(e.below(17) < 17);

    std::vector<int> v1{1, 2, 3, 4, 5, 6, 7, 8}, v2 = v1;
    Rng s1(11), s2(11);
    s1.shuffle(v1);
    s2.shuffle(v2);
    REQUIRE(v1 == v2);
}

TEST_CASE("rng forks are decorrelated from the parent") {
    Rng parent(1234);
    Rng child_a = parent.fork(1);
    Rng child_b = parent.fork(2);
    REQUIRE(child_a.uniform() != child_b.uniform());
    // forking twice with the same tag gives the same stream
    Rng again = parent.fork(1);
    Rng child_a2 = parent.fork(1);
    REQUIRE(again.uniform() == child_a2.uniform());
}

TEST_CASE("double formatting round-trips exactly") {
    for (double v : {0.0, -1.5, 1.0 / 3.0, 1e-300, 123456.789, 0.005, 841.509}) {
        REQUIRE(parse_double(fmt_double(v)) == v);
    }
    REQUIRE(fmt_double(std::numeric_limits<double>::infinity()) == "inf");
    REQUIRE(std::isinf(parse_double("inf")));
}

TEST_CASE("mesh files round-trip bit-exactly") {
    auto dir = temp_dir("mesh");
    auto topo = std::make_shared<Topology>();
    topo->id = "toy4";
    topo->vertex_count = 4;
    topo->faces = {0, 1, 2, 0, 2, 3};

    TriMesh mesh;
    mesh.topology = topo;
    Rng rng(5);
    for (int i = 0; i < 12; ++i) mesh.vertices.push_back(float(rng.uniform(-10, 10)));

    save_mesh(dir / "a.vtx", mesh);
    TriMesh back = load_mesh(dir / "a.vtx");
    REQUIRE(back.topology_id() == "toy4");
    REQUIRE(back.vertices == mesh.vertices);

    save_faces(dir / "toy4.faces", *topo);
    auto topo2 = load_faces(dir / "toy4.faces");
    REQUIRE(topo2->faces == topo->faces);
    REQUIRE(topo2->vertex_count == 4);

    // a second save of the loaded mesh writes identical bytes
    back.topology = topo2;
    save_mesh(dir / "b.vtx", back);
    REQUIRE(read_file(dir / "a.vtx") == read_file(dir / "b.vtx"));
}

TEST_CASE("wrong magic is a format error") {
    auto dir = temp_dir("magic");
    write_file(dir / "bad.vtx", std::string("{\"magic\":\"NOPE\",\"version\":1}\n"));
    REQUIRE(error_code([&] { load_mesh(dir / "bad.vtx"); }) == "io/bad-magic");
    write_file(dir / "bad.png", std::string("definitely not a png"));
    REQUIRE(error_code([&] { load_image(dir / "bad.png"); }) == "io/bad-magic");
}

TEST_CASE("tactile image png round-trip is exact at stored precision") {
    auto dir = temp_dir("png");
    TactileImage im = TactileImage::zeros(24, 32);
    Rng rng(17);
    for (auto& p : im.pixels) p = float(rng.uniform(-1, 1));

    save_image(dir / "a.png", im);
    TactileImage back = load_image(dir / "a.png");
    REQUIRE(back.height == im.height);
    REQUIRE(back.width == im.width);

    // one quantization cycle is idempotent: a second save/load is identity
    save_image(dir / "b.png", back);
    REQUIRE(read_file(dir / "a.png") == read_file(dir / "b.png"));
    TactileImage back2 = load_image(dir / "b.png");
    REQUIRE(back2.pixels == back.pixels);

    // error stays within half a quantization step of the original
    float max_diff = 0;
    for (std::size_t i = 0; i < im.pixels.size(); ++i)
        max_diff = std::max(max_diff, std::abs(im.pixels[i] - back.pixels[i]));
    REQUIRE(max_diff <= 0.5f / 127.5f + 1e-6f);

    // lattice-valued image is reproduced exactly
    TactileImage lattice = TactileImage::zeros(8, 8);
    for (std::size_t i = 0; i < lattice.pixels.size(); ++i)
        lattice.pixels[i] = dequantize_pixel(std::uint8_t(i * 37 % 256));
    save_image(dir / "c.png", lattice);
    REQUIRE(load_image(dir / "c.png").pixels == lattice.pixels);

    // all-zero image: within half a step, and endpoints are exact
    TactileImage zeros = TactileImage::zeros(240, 320);
    save_image(dir / "z.png", zeros);
    TactileImage zback = load_image(dir / "z.png");
    for (float v : zback.pixels) REQUIRE(std::abs(v) <= 0.5f / 127.5f + 1e-6f);
    REQUIRE(dequantize_pixel(quantize_pixel(1.0f)) == 1.0f);
    REQUIRE(dequantize_pixel(quantize_pixel(-1.0f)) == -1.0f);
}

TEST_CASE("out-of-range pixels are rejected on save") {
    auto dir = temp_dir("png_range");
    TactileImage im = TactileImage::zeros(4, 4);
    im.pixels[5] = 1.25f;
    REQUIRE(error_code([&] { save_image(dir / "x.png", im); }) == "image/range");
}

TEST_CASE("png decoder handles all five scanline filters") {
    // Hand-assemble a 3x4 RGB png where each row uses a different filter.
    const std::int32_t w = 4, h = 3;
    std::vector<std::uint8_t> pix(std::size_t(h) * w * 3);
    Rng rng(99);
    for (auto& p : pix) p = std::uint8_t(rng.below(256));

    auto stride = std::size_t(w) * 3;
    std::vector<std::uint8_t> raw;
    std::vector<std::uint8_t> prev(stride, 0);
    const int filters[3] = {1, 3, 4};  // sub, average, paeth
    for (std::int32_t y = 0; y < h; ++y) {
        const std::uint8_t* row = pix.data() + y * stride;
        raw.push_back(std::uint8_t(filters[y]));
        for (std::size_t i = 0; i < stride; ++i) {
            int a = i >= 3 ? row[i - 3] : 0;
            int b = prev[i];
            int c = i >= 3 ? prev[i - 3] : 0;
            int x = row[i];
            switch (filters[y]) {
                case 1: raw.push_back(std::uint8_t(x - a)); break;
                case 3: raw.push_back(std::uint8_t(x - (a + b) / 2)); break;
                case 4: raw.push_back(std::uint8_t(x - detail::png_paeth(a, b, c))); break;
            }
        }
        std::copy(row, row + stride, prev.begin());
    }
    ::uLongf clen = ::compressBound(::uLong(raw.size()));
    std::vector<std::uint8_t> comp(clen);
    REQUIRE(::compress2(comp.data(), &clen, raw.data(), ::uLong(raw.size()), 6) == Z_OK);
    comp.resize(clen);

    static const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    std::vector<std::uint8_t> file(sig, sig + 8);
    std::uint8_t ihdr[13] = {0, 0, 0, std::uint8_t(w), 0, 0, 0, std::uint8_t(h), 8, 2, 0, 0, 0};
    detail::png_chunk(file, "IHDR", ihdr, 13);
    detail::png_chunk(file, "IDAT", comp.data(), comp.size());
    detail::png_chunk(file, "IEND", nullptr, 0);

    PngImage img = decode_png(file, "synthetic");
    REQUIRE(img.width == w);
    REQUIRE(img.height == h);
    REQUIRE(img.rgb == pix);
}

TEST_CASE("force csv round-trips") {
    std::vector<ForceRecord> recs = {
        {"t0", 0, {0.125, -0.5, 2.75}},
        {"t0", 1, {0.1, 0.2, 3.3333333333333335}},
        {"t1", 0, {-3, 3, 13}},
    };
    std::string csv = forces_to_csv(recs);
    auto back = forces_from_csv(csv, "mem");
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE(back[i].trajectory_id == recs[i].trajectory_id);
        REQUIRE(back[i].frame == recs[i].frame);
        REQUIRE(back[i].force.fx == recs[i].force.fx);
        REQUIRE(back[i].force.fy == recs[i].force.fy);
        REQUIRE(back[i].force.fz == recs[i].force.fz);
    }
    REQUIRE(error_code([&] { forces_from_csv("bad,header\n", "mem"); }) == "io/bad-header");
}

namespace {

std::vector<TrajectorySample> make_samples(int trajectories, int frames_each,
                                           const std::string& sensor,
                                           const std::string& indenter) {
    std::vector<TrajectorySample> out;
    for (int t = 0; t < trajectories; ++t) {
        for (int f = 0; f < frames_each; ++f) {
            TrajectorySample s;
            s.trajectory_id = sensor + "_" + indenter + "_t" + std::to_string(t);
            s.sensor_id = sensor;
            s.indenter_id = indenter;
            s.frame = f;
            out.push_back(std::move(s));
        }
    }
    return out;
}

}  // namespace

TEST_CASE("split honors fractions with largest-remainder counts") {
    auto samples = make_samples(10, 5, "s0", "i0");
    auto split = split_dataset(samples, {0.8, 0.1, 0.1, 0.0}, {}, {}, 7);
    REQUIRE(split.train.size() == 8);
    REQUIRE(split.val.size() == 1);
    REQUIRE(split.test_a.size() == 1);
    REQUIRE(split.test_b.empty());

    // determinism, and seed sensitivity
    auto split2 = split_dataset(samples, {0.8, 0.1, 0.1, 0.0}, {}, {}, 7);
    REQUIRE(split.train == split2.train);
    REQUIRE(split.val == split2.val);
    REQUIRE(split.test_a == split2.test_a);

    auto big = make_samples(100, 1, "s0", "i0");
    auto sa = split_dataset(big, {0.8, 0.1, 0.1, 0.0}, {}, {}, 1);
    auto sb = split_dataset(big, {0.8, 0.1, 0.1, 0.0}, {}, {}, 2);
    REQUIRE(sa.train != sb.train);
}

TEST_CASE("holdout trajectories land exclusively in test_b") {
    std::vector<TrajectorySample> samples;
    for (int s = 0; s < 5; ++s)
        for (int i = 0; i < 13; ++i) {
            auto part = make_samples(3, 2, "s" + std::to_string(s), "i" + std::to_string(i));
            samples.insert(samples.end(), part.begin(), part.end());
        }
    auto split = split_dataset(samples, {0.6, 0.1, 0.1, 0.2}, {"s4"}, {"i11", "i12"}, 3);

    // brute-force scan: no held-out id anywhere outside test_b
    for (const auto& s : samples) {
        bool held = s.sensor_id == "s4" || s.indenter_id == "i11" || s.indenter_id == "i12";
        if (held) {
            REQUIRE(split.test_b.count(s.trajectory_id) == 1);
            REQUIRE(split.train.count(s.trajectory_id) == 0);
            REQUIRE(split.val.count(s.trajectory_id) == 0);
            REQUIRE(split.test_a.count(s.trajectory_id) == 0);
        } else {
            REQUIRE(split.test_b.count(s.trajectory_id) == 0);
            REQUIRE(split.contains(s.trajectory_id));
        }
    }
    // every trajectory is somewhere, exactly once
    split.validate();
    REQUIRE(split.train.size() + split.val.size() + split.test_a.size() +
                split.test_b.size() == 5 * 13 * 3);
}

TEST_CASE("split rejects bad inputs") {
    auto samples = make_samples(4, 1, "s0", "i0");
    REQUIRE(error_code([&] {
                split_dataset({}, {0.8, 0.1, 0.1, 0.0}, {}, {}, 0);
            }) == "split/empty");
    REQUIRE(error_code([&] {
                split_dataset(samples, {0.8, 0.1, 0.2, 0.0}, {}, {}, 0);
            }) == "split/fraction");
    REQUIRE(error_code([&] {
                split_dataset(samples, {0.7, 0.1, 0.1, 0.1}, {}, {}, 0);
            }) == "split/holdout");
    // everything held out but train fraction positive
    REQUIRE(error_code([&] {
                split_dataset(samples, {0.8, 0.1, 0.1, 0.0}, {"s0"}, {}, 0);
            }) == "split/unsatisfiable");
}

TEST_CASE("dataset directory round-trips") {
    auto dir = temp_dir("dataset");

    auto topo = std::make_shared<Topology>();
    topo->id = "toy4";
    topo->vertex_count = 4;
    topo->faces = {0, 1, 2, 0, 2, 3};

    DatasetWriter writer(dir / "ds");
    writer.write_topology(*topo);

    Rng rng(23);
    DatasetMeta meta;
    meta.name = "unit";
    meta.seed = 23;
    meta.image_height = 6;
    meta.image_width = 8;
    for (const std::string traj : {"a", "b"}) {
        TrajectoryMeta tm;
        tm.id = traj;
        tm.sensor_id = "s0";
        tm.indenter_id = "i0";
        tm.frames = 3;
        tm.topology_id = "toy4";
        meta.trajectories.push_back(tm);
        for (std::int32_t f = 0; f < 3; ++f) {
            TriMesh mesh;
            mesh.topology = topo;
            for (int i = 0; i < 12; ++i) mesh.vertices.push_back(float(rng.uniform(-1, 1)));
            TactileImage im = TactileImage::zeros(6, 8);
            for (auto& p : im.pixels) p = float(rng.uniform(-1, 1));
            ForceVec force{0.1, -0.1, f < 1 ? 0.5 : 2.0};  // frame 0 below the fz window
            writer.write_frame(traj, f, mesh, im, force);
        }
    }
    SensorMeta sm;
    sm.id = "s0";
    sm.background_trajectory = "a";
    sm.background_frame = 0;
    meta.sensors.push_back(sm);
    meta.indenters = {"i0"};
    DatasetSplit split;
    split.train = {"a"};
    split.test_a = {"b"};
    meta.split = split;
    writer.finalize(meta);

    Dataset ds = Dataset::open(dir / "ds");
    REQUIRE(ds.meta().name == "unit");
    REQUIRE(ds.trajectory("a").frames == 3);
    REQUIRE(ds.topology("toy4")->faces == topo->faces);

    TriMesh m = ds.mesh("a", 1);
    REQUIRE(m.vertex_count() == 4);
    REQUIRE(m.topology->has_faces());

    TactileImage im = ds.image("b", 2);
    REQUIRE(im.sensor_id == "s0");
    REQUIRE(im.height == 6);

    REQUIRE(ds.force("a", 2).fz == 2.0);
    REQUIRE(ds.background_image("s0").height == 6);

    auto train_eligible = ds.part_samples(ds.split().train, true);
    REQUIRE(train_eligible.size() == 2);  // frame 0 filtered by the fz window
    auto train_all = ds.part_samples(ds.split().train, false);
    REQUIRE(train_all.size() == 3);

    REQUIRE(error_code([&] { ds.mesh("zz", 0); }) == "io/open");
    REQUIRE(error_code([&] { ds.trajectory("zz"); }) == "dataset/unknown-trajectory");

    // meta.json writing is byte-stable
    std::string meta1 = read_text_file(dir / "ds" / "meta.json");
    write_file(dir / "ds" / "meta2.json", meta.to_json().dump(2) + "\n");
    REQUIRE(read_text_file(dir / "ds" / "meta2.json") == meta1);
}

TEST_CASE("latent compatibility checks") {
    LatentVec a = LatentVec::zeros(LatentSpace::Mesh, 8);
    LatentVec b = LatentVec::zeros(LatentSpace::Image, 8);
    LatentVec c = LatentVec::zeros(LatentSpace::Mesh, 4);
    REQUIRE(error_code([&] { require_compatible(a, b, "op"); }) == "latent/space-mismatch");
    REQUIRE(error_code([&] { require_compatible(a, c, "op"); }) == "latent/dim-mismatch");
    require_compatible(a, a, "op");
    REQUIRE(canonical_dim(LatentSpace::Mesh) == 128);
    REQUIRE(canonical_dim(LatentSpace::Image) == 256);
}

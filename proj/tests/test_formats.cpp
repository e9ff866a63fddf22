#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "lagdyn/checkpoint.hpp"
#include "lagdyn/container.hpp"
#include "lagdyn/dataset.hpp"
#include "lagdyn/errors.hpp"
#include "lagdyn/pgm.hpp"

using namespace lagdyn;
using testutil::random_tensor;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string read_bytes(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is);
    return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

} // namespace

TEST_SUITE("formats") {

TEST_CASE("container round trip is bit exact") {
    Rng rng(1);
    io::Container c;
    c.meta["alpha"] = "1";
    c.meta["note"] = "round trip";
    c.add_f32("small", random_tensor({2, 3}, rng));
    c.add_f64("big", random_tensor({4}, rng));
    const std::string path = temp_path("lagdyn_container_test.ldc");
    io::write_container(path, c);

    io::Container back = io::read_container(path);
    CHECK(back.meta == c.meta);
    REQUIRE(back.tensors.size() == 2);
    CHECK(back.require("small").f32 == c.require("small").f32);
    CHECK(back.require("big").f64 == c.require("big").f64);

    const std::string rewritten = temp_path("lagdyn_container_test2.ldc");
    io::write_container(rewritten, back);
    CHECK(read_bytes(path) == read_bytes(rewritten));
    std::remove(path.c_str());
    std::remove(rewritten.c_str());
}

TEST_CASE("corrupt containers are rejected") {
    const std::string path = temp_path("lagdyn_corrupt.ldc");
    {
        std::ofstream os(path, std::ios::binary);
        os << "NOPE garbage";
    }
    CHECK_THROWS_AS(io::read_container(path), DataError);
    CHECK_THROWS_AS(io::read_container(temp_path("lagdyn_missing_file.ldc")), DataError);
    std::remove(path.c_str());
}

TEST_CASE("dataset files survive a save/load/save cycle byte for byte") {
    const auto data = sim::generate_dataset(sim::SystemSpec::pendulum(), 2, 4, 9);
    const std::string p1 = temp_path("lagdyn_ds1.ldc");
    const std::string p2 = temp_path("lagdyn_ds2.ldc");
    sim::save_dataset(p1, data);
    const auto loaded = sim::load_dataset(p1);
    CHECK(loaded.trajectories.count() == 2);
    CHECK(loaded.trajectories.length() == 4);
    CHECK(loaded.trajectories.spec.kind == sim::SystemKind::pendulum);
    CHECK(loaded.trajectories.dt == doctest::Approx(0.05));
    CHECK(loaded.observations.frames.shape() == std::vector<int>{2, 6, 32, 32});
    sim::save_dataset(p2, loaded);
    CHECK(read_bytes(p1) == read_bytes(p2));

    // loaded states equal the float32 quantization of the originals
    for (int64_t i = 0; i < data.trajectories.states.size(); ++i)
        CHECK(loaded.trajectories.states[i] ==
              static_cast<double>(static_cast<float>(data.trajectories.states[i])));
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("checkpoints round trip exactly for both regimes") {
    Rng rng(5);
    io::Checkpoint ckpt;
    ckpt.regime = "state";
    ckpt.kind = sim::SystemKind::pendulum;
    ckpt.dt = 0.05;
    ckpt.lagrangian = nets::LagrangianModel::create(1, rng, 8);
    const std::string p1 = temp_path("lagdyn_ck1.ldc");
    io::save_checkpoint(p1, ckpt);
    io::Checkpoint back = io::load_checkpoint(p1);
    CHECK(back.regime == "state");
    CHECK(back.lagrangian.m == 1);
    CHECK(back.lagrangian.lambda == 1.0);
    for (size_t l = 0; l < 3; ++l) {
        CHECK(max_abs_diff(back.lagrangian.inertia_net.weights[l],
                           ckpt.lagrangian.inertia_net.weights[l]) == 0.0);
        CHECK(max_abs_diff(back.lagrangian.potential_net.biases[l],
                           ckpt.lagrangian.potential_net.biases[l]) == 0.0);
    }
    const std::string p2 = temp_path("lagdyn_ck2.ldc");
    io::save_checkpoint(p2, back);
    CHECK(read_bytes(p1) == read_bytes(p2));
    std::remove(p1.c_str());
    std::remove(p2.c_str());

    io::Checkpoint video;
    video.regime = "video";
    video.kind = sim::SystemKind::acrobot;
    video.dt = 0.05;
    video.lagrangian = nets::LagrangianModel::create(3, rng, 8);
    video.autoencoder = vision::AutoEncoder::create(vision::acrobot_conv_spec(), rng);
    const std::string p3 = temp_path("lagdyn_ck3.ldc");
    io::save_checkpoint(p3, video);
    io::Checkpoint vback = io::load_checkpoint(p3);
    REQUIRE(vback.autoencoder.has_value());
    CHECK(vback.autoencoder->encoder.spec.latent == 6);
    CHECK(max_abs_diff(vback.autoencoder->encoder.conv_w[0],
                       video.autoencoder->encoder.conv_w[0]) == 0.0);
    CHECK(max_abs_diff(vback.autoencoder->decoder.conv_w[2],
                       video.autoencoder->decoder.conv_w[2]) == 0.0);
    std::remove(p3.c_str());
}

TEST_CASE("pgm strips are valid and round trip through the reader") {
    Rng rng(6);
    Tensor img = random_tensor({8, 12}, rng, 0.0, 1.0);
    const std::string path = temp_path("lagdyn_img.pgm");
    io::write_pgm(path, img);

    std::ifstream is(path, std::ios::binary);
    std::string header;
    std::getline(is, header);
    CHECK(header == "P5");
    is.close();

    const Tensor back = io::read_pgm(path);
    REQUIRE(back.shape() == img.shape());
    // quantized to 1/255
    CHECK(max_abs_diff(back, img) <= 0.5 / 255.0 + 1e-12);
    std::remove(path.c_str());
}

TEST_CASE("file checksum is stable and content sensitive") {
    const std::string path = temp_path("lagdyn_sum.bin");
    {
        std::ofstream os(path, std::ios::binary);
        os << "some bytes";
    }
    const uint64_t a = io::file_checksum(path);
    const uint64_t b = io::file_checksum(path);
    CHECK(a == b);
    {
        std::ofstream os(path, std::ios::binary);
        os << "some bytez";
    }
    CHECK(io::file_checksum(path) != a);
    std::remove(path.c_str());
}

} // TEST_SUITE

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

#include "test_support.hpp"

using namespace dnsp;
using dnsp::testing::uniform_image;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("dnsp_test_" + name)).string();
}

Checkpoint sample_checkpoint() {
    TrainConfig cfg;
    cfg.architecture = {{3, 3, 1, 3, Activation::ReLU}, {1, 1, 3, 1, Activation::Identity}};
    cfg.n_sharp_filters = 3;
    cfg.seed = 99;
    cfg.exclusions = {2, 5};
    cfg.loss.gamma = 1.0 / 3.0;
    TrainState st = init_train_state(cfg);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    for (double& v : st.theta.values()) v = n(rng);
    for (double& v : st.theta_adam.m) v = n(rng);
    for (double& v : st.theta_adam.v) v = std::abs(n(rng));
    for (double& v : st.bank_adam.m) v = n(rng);
    st.theta_adam.step = st.bank_adam.step = 12;
    st.epoch = 4;
    return {cfg, st};
}

} // namespace

TEST(KeyValues, ParsesCommentsAndWhitespace) {
    const auto kv = parse_key_values("# comment\n  alpha = 0.5  # trailing\n\nseed=3\nlayer = 1,1,1,1,identity\n"
                                     "layer = 3,3,1,1,identity\n");
    ASSERT_EQ(kv.size(), 4u);
    EXPECT_EQ(kv[0], (std::pair<std::string, std::string>{"alpha", "0.5"}));
    EXPECT_EQ(kv[1].second, "3");
    EXPECT_THROW(parse_key_values("alpha 0.5\n"), ConfigError);
    EXPECT_THROW(parse_key_values("alpha = 1\nalpha = 2\n"), ConfigError);
    EXPECT_THROW(parse_key_values(" = 1\n"), ConfigError);
}

TEST(RunConfig, ParsesEveryField) {
    const RunConfig rc = parse_run_config(
        "data = images/train\nscale = 3\nblur_sigma = 1.5\npatch_size = 30\nstride = 10\nbatch_size = 8\n"
        "epochs = 4\nlearning_rate = 0.001\noptimizer = sgd\nalpha = 0\nbeta = 0.25\ngamma = 0\ndelta = 0.5\n"
        "prior_padding = zero\nn_sharp_filters = 2\nseed = 11\ninit = gaussian\nlearn_filters = false\n"
        "exclude = 1, 4\nlayer = 5,5,1,8,relu\nlayer = 3,3,8,1,identity\n");
    const TrainConfig& c = rc.train;
    EXPECT_EQ(rc.data_dir, "images/train");
    EXPECT_EQ(c.scale, 3u);
    EXPECT_EQ(c.blur_sigma, 1.5);
    EXPECT_EQ(c.patch_size, 30u);
    EXPECT_EQ(c.stride, 10u);
    EXPECT_EQ(c.batch_size, 8u);
    EXPECT_EQ(c.epochs, 4u);
    EXPECT_EQ(c.learning_rate, 0.001);
    EXPECT_EQ(c.optimizer, OptimizerKind::SGD);
    EXPECT_EQ(c.loss.alpha, 0.0);
    EXPECT_EQ(c.loss.beta, 0.25);
    EXPECT_EQ(c.loss.delta, 0.5);
    EXPECT_EQ(c.loss.prior_padding, PaddingMode::Zero);
    EXPECT_EQ(c.n_sharp_filters, 2u);
    EXPECT_EQ(c.seed, 11u);
    EXPECT_EQ(c.init, InitScheme::Gaussian);
    EXPECT_FALSE(c.learn_filters);
    EXPECT_EQ(c.exclusions, (std::vector<std::size_t>{1, 4}));
    ASSERT_EQ(c.architecture.size(), 2u);
    EXPECT_EQ(c.architecture[0], (LayerSpec{5, 5, 1, 8, Activation::ReLU}));
}

TEST(RunConfig, EmptyTextGivesDefaults) {
    EXPECT_EQ(parse_run_config("").train, TrainConfig{});
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
    EXPECT_THROW(parse_run_config("learning_rat = 0.1\n"), ConfigError);
    EXPECT_THROW(parse_run_config("alpha = fast\n"), ConfigError);
    EXPECT_THROW(parse_run_config("epochs = -3\n"), ConfigError);
    EXPECT_THROW(parse_run_config("optimizer = lbfgs\n"), ConfigError);
    EXPECT_THROW(parse_run_config("scale = 7\n"), ConfigError);
    EXPECT_THROW(parse_run_config("layer = 3,3,1\n"), ConfigError);
    EXPECT_THROW(parse_run_config("layer = 3,3,1,4,relu\n"), ConfigError);
    EXPECT_THROW(parse_run_config("learn_filters = maybe\n"), ConfigError);
    EXPECT_THROW(load_run_config(temp_path("missing.cfg")), IoError);
}

TEST(RunConfig, FormatRoundTrips) {
    TrainConfig cfg;
    cfg.learning_rate = 0.1 + 0.2;
    cfg.loss.gamma = 1.0 / 7.0;
    cfg.exclusions = {0, 9};
    cfg.optimizer = OptimizerKind::SGD;
    EXPECT_EQ(parse_run_config(format_train_config(cfg)).train, cfg);
}

TEST(Checkpoint, RoundTripIsBitExact) {
    const Checkpoint ck = sample_checkpoint();
    const std::string path = temp_path("roundtrip.ckpt");
    save_checkpoint(path, ck);
    const Checkpoint back = load_checkpoint(path);
    EXPECT_EQ(back, ck);
    EXPECT_EQ(encode_checkpoint(back), encode_checkpoint(ck));
    std::filesystem::remove(path);
}

TEST(Checkpoint, LayoutStartsWithMagicAndVersion) {
    const auto bytes = encode_checkpoint(sample_checkpoint());
    ASSERT_GT(bytes.size(), 16u);
    EXPECT_EQ(std::string(bytes.data(), 4), "DNSP");
    EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1u);
    EXPECT_EQ(bytes[5], 0);
    EXPECT_EQ(bytes[6], 0);
    EXPECT_EQ(bytes[7], 0);
    std::uint64_t header_len = 0;
    for (int i = 7; i >= 0; --i) header_len = (header_len << 8) | static_cast<unsigned char>(bytes[8 + i]);
    const Checkpoint ck = sample_checkpoint();
    const std::size_t nt = ck.state.theta.parameter_count(), nb = 27;
    EXPECT_EQ(bytes.size(), 16 + header_len + 8 * (3 * nt + 3 * nb));
    // first parameter value, little-endian f64, right after the header
    double first = 0.0;
    std::memcpy(&first, bytes.data() + 16 + header_len, 8);
    EXPECT_EQ(first, ck.state.theta.values()[0]);
}

TEST(Checkpoint, CorruptMagicIsFormatError) {
    auto bytes = encode_checkpoint(sample_checkpoint());
    bytes[0] = 'X';
    EXPECT_THROW(decode_checkpoint(bytes), FormatError);
}

TEST(Checkpoint, NewerVersionIsVersionError) {
    auto bytes = encode_checkpoint(sample_checkpoint());
    bytes[4] = static_cast<char>(checkpoint_version + 1);
    EXPECT_THROW(decode_checkpoint(bytes), VersionError);
}

TEST(Checkpoint, TruncatedFileIsIoError) {
    const auto bytes = encode_checkpoint(sample_checkpoint());
    for (std::size_t keep : {std::size_t{2}, std::size_t{10}, std::size_t{40}, bytes.size() - 1}) {
        std::vector<char> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(keep));
        EXPECT_THROW(decode_checkpoint(cut), IoError) << keep;
    }
}

TEST(Checkpoint, TrailingBytesAndBadHeaderAreFormatErrors) {
    auto bytes = encode_checkpoint(sample_checkpoint());
    auto longer = bytes;
    longer.push_back(0);
    EXPECT_THROW(decode_checkpoint(longer), FormatError);
    // replace the first header byte ('s' of "scale") to create an unknown key
    bytes[16] = 'z';
    EXPECT_THROW(decode_checkpoint(bytes), FormatError);
}

TEST(Checkpoint, MissingFileIsIoError) {
    EXPECT_THROW(load_checkpoint(temp_path("does_not_exist.ckpt")), IoError);
}

TEST(Pgm, SixteenBitRoundTripWithinQuantization) {
    const Image img = uniform_image(13, 17, 3);
    const Image back = decode_pgm(encode_pgm(img));
    ASSERT_TRUE(back.same_shape(img));
    for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(back.values()[i], img.values()[i], 0.5 / 65535 + 1e-15);
    // a second pass is exact
    EXPECT_EQ(decode_pgm(encode_pgm(back)), back);
}

TEST(Pgm, ClampsOutOfRangeValues) {
    const Image img = Image::from_rows({{-0.5, 0.0, 1.0, 2.0}});
    EXPECT_EQ(decode_pgm(encode_pgm(img)), Image::from_rows({{0.0, 0.0, 1.0, 1.0}}));
}

TEST(Pgm, ReadsEightBitWithComments) {
    const std::string header = "P5\n# made by hand\n3 2\n255\n";
    std::vector<unsigned char> bytes(header.begin(), header.end());
    for (unsigned char v : {0, 51, 102, 153, 204, 255}) bytes.push_back(v);
    const Image img = decode_pgm(bytes);
    EXPECT_EQ(img.height(), 2u);
    EXPECT_EQ(img.width(), 3u);
    EXPECT_DOUBLE_EQ(img(0, 1), 0.2);
    EXPECT_EQ(img(1, 2), 1.0);
}

TEST(Pgm, FileRoundTrip) {
    const std::string path = temp_path("img.pgm");
    const Image img = decode_pgm(encode_pgm(uniform_image(6, 5, 4)));
    write_pgm(path, img);
    EXPECT_EQ(read_pgm(path), img);
    std::filesystem::remove(path);
}

TEST(Pgm, MalformedInput) {
    const std::string p2 = "P2\n2 2\n255\n0 0 0 0\n";
    EXPECT_THROW(decode_pgm({p2.begin(), p2.end()}), FormatError);
    const std::string zero = "P5\n0 2\n255\n";
    EXPECT_THROW(decode_pgm({zero.begin(), zero.end()}), FormatError);
    const std::string maxv = "P5\n1 1\n70000\n";
    EXPECT_THROW(decode_pgm({maxv.begin(), maxv.end()}), FormatError);
    const std::string shortdata = "P5\n4 4\n255\nabc";
    EXPECT_THROW(decode_pgm({shortdata.begin(), shortdata.end()}), IoError);
    EXPECT_THROW(read_pgm(temp_path("nope.pgm")), IoError);
}

TEST(Csv, RealsAndSentinels) {
    EXPECT_EQ(csv_real(0.5), "0.5");
    EXPECT_EQ(csv_real(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(csv_real(-std::numeric_limits<double>::infinity()), "-inf");
    EXPECT_EQ(csv_real(std::nan("")), "nan");
    EXPECT_EQ(std::stod(csv_real(0.1 + 0.2)), 0.1 + 0.2);
}

TEST(Csv, StudyAndHistoryLayouts) {
    const std::vector<StudyRow> rows{{1, 20.5}, {2, std::numeric_limits<double>::infinity()}};
    EXPECT_EQ(study_csv(rows), "parameter,value\n1,20.5\n2,inf\n");
    std::vector<EpochRecord> h{{1, 3.0, {2.0, 1.0, 0.5, -4.0}}};
    EXPECT_EQ(history_csv(h), "epoch,total,mse,lowrank,sharpness,filter_measure\n1,3,2,1,0.5,-4\n");
}

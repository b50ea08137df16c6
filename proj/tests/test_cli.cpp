#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr combined
};

RunResult run_cli(const std::string& args) {
    const std::string command = std::string(SQDSE_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    char buf[4096];
    while (size_t n = fread(buf, 1, sizeof buf, pipe)) result.output.append(buf, n);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string fixture(const std::string& name) {
    return std::string(SQDSE_FIXTURE_DIR) + "/" + name;
}

int count_lines(const std::string& text) {
    int lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    return lines;
}

std::string temp_path(const std::string& name) {
    return std::string("/tmp/sqdse_test_") + std::to_string(getpid()) + "_" + name;
}

}  // namespace

TEST_CASE("list covers the catalog in all formats") {
    const RunResult table = run_cli("list");
    CHECK(table.exit_code == 0);
    CHECK(table.output.find("1.0-SqNxt-23v5") != std::string::npos);
    CHECK(table.output.find("0.94M") != std::string::npos);
    CHECK(table.output.find("228M") != std::string::npos);

    const RunResult csv = run_cli("list --format csv");
    CHECK(csv.exit_code == 0);
    CHECK(count_lines(csv.output) >= 19);  // header + at least 18 rows
    CHECK(csv.output.rfind("name,", 0) == 0);

    const RunResult json = run_cli("list --format json");
    CHECK(json.exit_code == 0);
    const auto doc = nlohmann::json::parse(json.output);
    CHECK(doc.is_array());
    CHECK(doc.size() >= 18);
}

TEST_CASE("describe prints totals that match the counters") {
    const RunResult r = run_cli("describe 1.0-SqNxt-23");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("total: 724056 params, 277999808 macs") != std::string::npos);
}

TEST_CASE("describe reads a network file") {
    const RunResult r = run_cli("describe " + fixture("toy.net.json") + " --format csv");
    CHECK(r.exit_code == 0);
    CHECK(count_lines(r.output) == 4);  // header + 3 layers
}

TEST_CASE("unknown names exit with the usage code") {
    const RunResult r = run_cli("describe nonexistent-net");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("unknown network") != std::string::npos);
}

TEST_CASE("bad flags exit with the usage code") {
    CHECK(run_cli("simulate 1.0-SqNxt-23 --frobnicate").exit_code == 2);
    CHECK(run_cli("").exit_code == 2);
}

TEST_CASE("invalid config values exit with the model error code") {
    const std::string path = temp_path("bad_config.json");
    std::ofstream(path) << R"({"preset": "8x8_32KB", "weight_sparsity": 2.0})";
    const RunResult r = run_cli("simulate 1.0-SqNxt-23 --config " + path);
    CHECK(r.exit_code == 1);
    std::remove(path.c_str());
}

TEST_CASE("simulate emits identical numbers in csv and json") {
    const RunResult csv = run_cli("simulate 1.0-SqNxt-23v5 --config 8x8_32KB --format csv");
    const RunResult json = run_cli("simulate 1.0-SqNxt-23v5 --config 8x8_32KB --format json");
    REQUIRE(csv.exit_code == 0);
    REQUIRE(json.exit_code == 0);
    const auto doc = nlohmann::json::parse(json.output);
    // spot-check the first conv row against the csv line
    const auto& first = doc.at("layers").at(0);
    std::istringstream lines(csv.output);
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    std::ostringstream prefix;
    prefix << first.at("layer").get<std::string>() << ',' << first.at("kind").get<std::string>()
           << ',' << first.at("mode").get<std::string>() << ',' << first.at("tiles").get<long long>()
           << ',' << first.at("compute_cycles").get<long long>() << ','
           << first.at("dram_cycles").get<long long>() << ','
           << first.at("total_cycles").get<long long>();
    CHECK(row.rfind(prefix.str(), 0) == 0);
}

TEST_CASE("simulate runs are deterministic") {
    const std::string cmd = "simulate 1.0-SqNxt-23 --config 16x16_128KB --format csv";
    CHECK(run_cli(cmd).output == run_cli(cmd).output);
}

TEST_CASE("zero sparsity is never faster than the default") {
    auto total_of = [](const std::string& extra) {
        const RunResult r = run_cli("simulate 1.0-SqNxt-23 --config 8x8_32KB --format json" + extra);
        REQUIRE(r.exit_code == 0);
        return nlohmann::json::parse(r.output).at("total_cycles").get<long long>();
    };
    CHECK(total_of(" --sparsity 0") >= total_of(""));
}

TEST_CASE("forcing os beats ws on the depthwise layers") {
    auto layer_sum = [](const std::string& mode) {
        const RunResult r =
            run_cli("simulate MobileNet-1.0-224 --config 16x16_128KB --format json --mode " + mode);
        REQUIRE(r.exit_code == 0);
        long long sum = 0;
        for (const auto& layer : nlohmann::json::parse(r.output).at("layers"))
            if (layer.at("layer").get<std::string>().rfind("dw", 0) == 0)
                sum += layer.at("total_cycles").get<long long>();
        return sum;
    };
    CHECK(layer_sum("os") <= layer_sum("ws"));
}

TEST_CASE("compare marks the fastest network with 1.00") {
    const RunResult r =
        run_cli("compare SqueezeNet-v1.0 1.0-SqNxt-23 1.0-SqNxt-23v5 --config 16x16_128KB "
                "--format json");
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.output);
    REQUIRE(doc.size() == 3);
    long long min_cycles = -1;
    for (const auto& row : doc) {
        const long long cycles = row.at("total_cycles").get<long long>();
        if (min_cycles < 0 || cycles < min_cycles) min_cycles = cycles;
    }
    CHECK(doc.at(2).at("name") == "1.0-SqNxt-23v5");
    CHECK(doc.at(2).at("total_cycles").get<long long>() == min_cycles);
    CHECK(doc.at(2).at("normalized_time").get<double>() == doctest::Approx(1.0));

    const RunResult single = run_cli("compare AlexNet --config 8x8_32KB");
    CHECK(single.exit_code == 0);
    CHECK(single.output.find("1.00") != std::string::npos);
}

TEST_CASE("sweep walks the full grid deterministically") {
    const RunResult r = run_cli(
        "sweep 1.0-SqNxt-23v5 --pe 8x8,16x16 --buffer 32768,131072 --format csv");
    REQUIRE(r.exit_code == 0);
    CHECK(count_lines(r.output) == 5);  // header + 4 grid points
    // cycles non-increasing as the buffer grows with the PE geometry fixed
    std::istringstream lines(r.output);
    std::string header;
    std::getline(lines, header);
    long long cycles[4];
    for (auto& c : cycles) {
        std::string line;
        REQUIRE(std::getline(lines, line));
        std::stringstream fields(line);
        std::string field;
        for (int i = 0; i < 4; ++i) std::getline(fields, field, ',');
        c = std::stoll(field);
    }
    CHECK(cycles[1] <= cycles[0]);  // 8x8: 128KB vs 32KB
    CHECK(cycles[3] <= cycles[2]);  // 16x16: 128KB vs 32KB
    CHECK(cycles[3] <= cycles[1]);  // bigger array is not slower here
}

TEST_CASE("export round trips through describe") {
    const std::string path = temp_path("exported.json");
    CHECK(run_cli("export 1.0-SqNxt-23 --output " + path).exit_code == 0);
    const RunResult direct = run_cli("describe 1.0-SqNxt-23 --format csv");
    const RunResult from_file = run_cli("describe " + path + " --format csv");
    CHECK(from_file.exit_code == 0);
    CHECK(from_file.output == direct.output);
    // exporting the re-imported file reproduces the bytes
    const std::string second = temp_path("exported2.json");
    CHECK(run_cli("export " + path + " --output " + second).exit_code == 0);
    std::ifstream a(path), b(second);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
    std::remove(path.c_str());
    std::remove(second.c_str());
}

TEST_CASE("export to an unwritable path fails") {
    CHECK(run_cli("export 1.0-SqNxt-23 --output /nonexistent_dir/out.json").exit_code == 1);
}

TEST_CASE("figure data lands in the requested file") {
    const std::string path = temp_path("figure.csv");
    const RunResult r = run_cli("simulate 1.0-SqNxt-23 --config 16x16_128KB --figure-data " + path +
                                " --format csv --output /dev/null");
    CHECK(r.exit_code == 0);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "name,cycles,efficiency");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows > 5);
    std::remove(path.c_str());
}

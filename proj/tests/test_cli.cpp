// Drives the installed command-line binary end to end: synthesize fields,
// refactor them into a store, retrieve against tolerances, sweep, and the
// builtin self-check; also the exit-code contract for bad invocations.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "json.hpp"
#include "oracle.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = PROQOI_CLI_PATH;

int run(const std::string& args, const std::string& log) {
    const std::string cmd = kCli + " " + args + " > " + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1)
        return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep))
        out.push_back(item);
    return out;
}

} // namespace

TEST_CASE("synth, refactor, retrieve, sweep, and qoi-check round trip") {
    oracle::TempDir dir("cli-e2e");
    const std::string raw = dir.file("raw");
    const std::string store = dir.file("store");
    const std::string log = dir.file("log.txt");

    // 1. Deterministic fields on disk.
    REQUIRE(run("synth --kind sinusoid-mix --n 4096 --seed 5 --out " + raw, log) == 0);
    for (const char* name : {"Vx", "Vy", "Vz", "P", "D"}) {
        const fs::path p = fs::path(raw) / (std::string(name) + ".f64");
        REQUIRE(fs::exists(p));
        CHECK(fs::file_size(p) == 4096 * 8);
    }

    // 2. Refactor into a progressive store (names from file stems).
    std::string refactor_cmd = "refactor --out " + store;
    for (const char* name : {"Vx", "Vy", "Vz", "P", "D"})
        refactor_cmd += " --input " + raw + "/" + name + ".f64";
    REQUIRE(run(refactor_cmd, log) == 0);
    REQUIRE(fs::exists(fs::path(store) / "manifest.json"));

    // 3. Retrieve three QoIs, one via builtin-name expansion.
    const std::string report_path = dir.file("report.json");
    const std::string trace_path = dir.file("trace.csv");
    const std::string dump = dir.file("recon");
    const int rc = run("retrieve --store " + store +
                           " --qoi 'VTOT=sqrt(Vx^2+Vy^2+Vz^2)@1e-4'"
                           " --qoi 'T=P / (D * 287.1)@1e-4'"
                           " --qoi 'M=Mach@1e-2'"
                           " --report " + report_path + " --trace " + trace_path +
                           " --dump " + dump,
                       log);
    INFO(slurp(log));
    REQUIRE(rc == 0);

    const auto report = nlohmann::json::parse(slurp(report_path));
    CHECK(report["satisfied"].get<bool>());
    REQUIRE(report["qois"].size() == 3);
    for (const auto& q : report["qois"]) {
        CHECK(q["satisfied"].get<bool>());
        CHECK(q["estimate"].get<double>() <= q["tolerance"].get<double>());
    }
    CHECK(report["total_bytes"].get<std::uint64_t>() > 0);

    const std::string trace = slurp(trace_path);
    CHECK(trace.rfind("iteration,", 0) == 0);
    CHECK(trace.find("est_VTOT") != std::string::npos);

    for (const char* name : {"Vx", "Vy", "Vz", "P", "D"}) {
        const fs::path p = fs::path(dump) / (std::string(name) + ".f64");
        REQUIRE(fs::exists(p));
        CHECK(fs::file_size(p) == 4096 * 8);
    }

    // 4. Sweep with originals: the measured column must honor the tolerance.
    const std::string csv_path = dir.file("sweep.csv");
    const int sw = run("sweep --store " + store +
                           " --qoi 'VTOT=sqrt(Vx^2+Vy^2+Vz^2)'"
                           " --schedule 1e-1,1e-2,1e-3"
                           " --original Vx=" + raw + "/Vx.f64" +
                           " --original Vy=" + raw + "/Vy.f64" +
                           " --original Vz=" + raw + "/Vz.f64" +
                           " --out " + csv_path,
                       log);
    INFO(slurp(log));
    REQUIRE(sw == 0);

    const auto lines = split(slurp(csv_path), '\n');
    REQUIRE(lines.size() >= 4); // header + 3 rungs (+ trailing blank)
    CHECK(lines[0] == "codec,qoi,requested_tau,max_estimated,max_actual,bitrate,bytes,"
                      "iterations,satisfied,reduction_factor");
    double prev_tau = 1e300;
    for (std::size_t i = 1; i <= 3; ++i) {
        const auto cells = split(lines[i], ',');
        REQUIRE(cells.size() == 10);
        CHECK(cells[0] == "bitplane");
        CHECK(cells[1] == "VTOT");
        const double tau = std::stod(cells[2]);
        const double est = std::stod(cells[3]);
        const double actual = std::stod(cells[4]);
        CHECK(tau < prev_tau);
        prev_tau = tau;
        CHECK(est <= tau);
        CHECK(actual <= est);
        CHECK(cells[8] == "1");
        CHECK(std::stod(cells[9]) > 0.0);
    }

    // 5. Builtin quantities against their closed forms.
    REQUIRE(run("qoi-check --trials 2000 --seed 3", log) == 0);
    const std::string check_log = slurp(log);
    CHECK(check_log.find("within 1e-12") != std::string::npos);
}

TEST_CASE("masked zero patch flows through refactor and retrieve") {
    oracle::TempDir dir("cli-mask");
    const std::string raw = dir.file("raw");
    const std::string store = dir.file("store");
    const std::string log = dir.file("log.txt");

    REQUIRE(run("synth --kind zero-patch-velocity --n 3000 --seed 11 --patch-fraction 0.2 "
                "--out " + raw,
                log) == 0);
    REQUIRE(run("refactor --codec delta --mask-zeros --out " + store + " --input " + raw +
                    "/Vx.f64 --input " + raw + "/Vy.f64 --input " + raw + "/Vz.f64",
                log) == 0);
    CHECK(slurp(log).find("mask covers 600 of 3000 points") != std::string::npos);

    const std::string dump = dir.file("recon");
    REQUIRE(run("retrieve --store " + store +
                    " --qoi 'VTOT=sqrt(Vx^2+Vy^2+Vz^2)@1e-3' --dump " + dump,
                log) == 0);

    // Masked points come back as exact zeros in every dumped component.
    for (const char* name : {"Vx", "Vy", "Vz"}) {
        std::ifstream in(fs::path(dump) / (std::string(name) + ".f64"), std::ios::binary);
        REQUIRE(in.good());
        std::vector<double> values(3000);
        in.read(reinterpret_cast<char*>(values.data()), 3000 * 8);
        REQUIRE(in.good());
        std::size_t zeros = 0;
        for (double v : values)
            zeros += v == 0.0 ? 1 : 0;
        CHECK(zeros >= 600);
    }
}

TEST_CASE("exit codes: usage errors are 1, unsatisfiable retrievals are 2") {
    oracle::TempDir dir("cli-exit");
    const std::string log = dir.file("log.txt");

    // Missing required flags: CLI parse failure (nonzero, handled by the
    // option parser itself).
    CHECK(run("synth --kind sinusoid-mix", log) != 0);
    CHECK(run("refactor --codec no-such-codec --input x --out y", log) != 0);
    CHECK(run("", log) != 0);

    // Semantic errors surface as exit 1 with a message.
    CHECK(run("retrieve --store " + dir.file("absent") + " --qoi q=F@1e-3", log) == 1);
    CHECK(slurp(log).find("error:") != std::string::npos);

    const std::string raw = dir.file("raw");
    const std::string store = dir.file("store");
    REQUIRE(run("synth --kind smoothed-noise --n 1000 --seed 2 --out " + raw, log) == 0);
    REQUIRE(run("refactor --out " + store + " --input " + raw + "/F.f64", log) == 0);

    CHECK(run("retrieve --store " + store + " --qoi bad-spec-no-equals", log) == 1);
    CHECK(run("retrieve --store " + store + " --qoi q=nosuchvar@1e-3", log) == 1);

    // An impossible absolute tolerance ends honestly: exit 2.
    CHECK(run("retrieve --store " + store + " --absolute --qoi q=F@1e-30", log) == 2);
}

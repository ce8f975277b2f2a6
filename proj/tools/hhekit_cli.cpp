// SPDX-License-Identifier: Apache-2.0
//
// hhekit command line: prime search, dual-mode encrypt/decrypt, keystream
// dumps, accelerator simulation, and latency/crossover reports.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hhekit/accelsim.hpp"
#include "hhekit/ckks.hpp"
#include "hhekit/errors.hpp"
#include "hhekit/field.hpp"
#include "hhekit/hhe.hpp"
#include "hhekit/netmodel.hpp"
#include "hhekit/rng.hpp"
#include "hhekit/rubato.hpp"

using namespace hhekit;

namespace {

constexpr char kSeMagic[4] = {'H', 'H', 'E', 'S'};

std::vector<double> read_message_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open message file " + path, 0);
    std::vector<double> out;
    std::string token;
    while (in >> token) {
        std::replace(token.begin(), token.end(), ',', ' ');
        std::istringstream ts(token);
        double v;
        while (ts >> v) out.push_back(v);
    }
    if (out.empty()) throw FormatError("message file " + path + " holds no numbers", 0);
    return out;
}

void write_message_file(const std::string& path, std::span<const double> values) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open output file " + path, 0);
    out.precision(12);
    for (double v : values) out << v << '\n';
}

void write_u64(std::ostream& os, uint64_t v) {
    for (int i = 0; i < 8; ++i) os.put(char(uint8_t(v >> (8 * i))));
}

uint64_t read_u64(std::istream& is, size_t& off) {
    uint8_t b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw FormatError("truncated file", off);
    off += 8;
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
    return v;
}

void write_se_file(const std::string& path, const hhe::SegmentedCiphertext& se) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open output file " + path, 0);
    out.write(kSeMagic, 4);
    uint8_t preset = se.preset == rubato::Preset::k128S ? 0 : (se.preset == rubato::Preset::k128M ? 1 : 2);
    out.put(char(preset));
    out.put(char(uint8_t(se.se_scale_bits)));
    out.put(0);
    out.put(0);
    write_u64(out, se.message_length);
    out.write(reinterpret_cast<const char*>(se.base_nonce.data()), 16);
    for (uint64_t w : se.flat_words()) write_u64(out, w);
}

hhe::SegmentedCiphertext read_se_file(std::istream& in) {
    size_t off = 4;
    uint8_t preset_b = uint8_t(in.get());
    uint8_t scale_b = uint8_t(in.get());
    in.get();
    in.get();
    off += 4;
    hhe::SegmentedCiphertext se;
    se.preset = preset_b == 0 ? rubato::Preset::k128S
                              : (preset_b == 1 ? rubato::Preset::k128M : rubato::Preset::k128L);
    se.se_scale_bits = scale_b;
    se.message_length = read_u64(in, off);
    se.base_nonce.resize(16);
    in.read(reinterpret_cast<char*>(se.base_nonce.data()), 16);
    if (!in) throw FormatError("truncated nonce", off);
    off += 16;
    auto params = rubato::Params::get(se.preset);
    size_t remaining = se.message_length;
    while (remaining > 0) {
        size_t chunk = std::min<size_t>(params.l, remaining);
        std::vector<uint64_t> seg(chunk);
        for (auto& w : seg) w = read_u64(in, off);
        se.segments.push_back(std::move(seg));
        remaining -= chunk;
    }
    return se;
}

ckks::Context make_context() { return ckks::Context{ckks::EncodingParams{}}; }

struct SimSummary {
    std::string workload;
    std::vector<std::pair<std::string, uint64_t>> lines;
};

void print_report(const std::string& label, const accelsim::CycleReport& r) {
    std::cout << label << " total_cycles: " << r.total_cycles
              << " compute_cycles: " << r.compute_cycles << '\n';
    for (const auto& [unit, stats] : r.units)
        std::cout << "  " << accelsim::unit_name(unit) << " busy: " << stats.busy_cycles
                  << " tasks: " << stats.tasks << '\n';
}

int run(int argc, char** argv) {
    CLI::App app{"hhekit: edge-side hybrid homomorphic encryption toolkit"};
    app.require_subcommand(1);

    // primes
    auto* primes = app.add_subcommand("primes", "search NTT-friendly structured primes");
    unsigned k = 54, log_n = 13, bnd_bits = 10;
    std::string primes_out;
    primes->add_option("--k", k, "prime bit width")->capture_default_str();
    primes->add_option("--logN", log_n, "log2 of the ring degree")->capture_default_str();
    primes->add_option("--bnd-bits", bnd_bits, "bit width of the bnd factor")->capture_default_str();
    primes->add_option("--out", primes_out, "write CSV here instead of stdout");

    // keygen
    auto* keygen = app.add_subcommand("keygen", "derive key material from a seed");
    std::string kg_seed, kg_out = "keys.bin";
    keygen->add_option("--seed", kg_seed, "hex seed")->required();
    keygen->add_option("--out", kg_out, "key file")->capture_default_str();

    // encrypt
    auto* encrypt = app.add_subcommand("encrypt", "dual-mode message encryption");
    std::string enc_mode = "auto", enc_keys = "keys.bin", enc_in, enc_out = "ct.bin";
    std::string enc_cloud = "high", enc_bus = "2x256", enc_nonce, enc_seed_hex = "00";
    std::string enc_preset = "128L";
    unsigned se_scale_bits = 20;
    size_t enc_lm = 0;
    encrypt->add_option("--mode", enc_mode, "auto|ckks|rubato")->capture_default_str();
    encrypt->add_option("--keys", enc_keys, "key file")->capture_default_str();
    encrypt->add_option("--in", enc_in, "message file (one real per line)")->required();
    encrypt->add_option("--out", enc_out, "ciphertext file")->capture_default_str();
    encrypt->add_option("--lm", enc_lm, "message length override");
    encrypt->add_option("--cloud-load", enc_cloud, "low|high hint for auto mode")->capture_default_str();
    encrypt->add_option("--bus", enc_bus, "bus profile for auto mode")->capture_default_str();
    encrypt->add_option("--nonce", enc_nonce, "hex nonce (16 bytes); derived from seed if absent");
    encrypt->add_option("--seed", enc_seed_hex, "hex randomness seed")->capture_default_str();
    encrypt->add_option("--preset", enc_preset, "128S|128M|128L")->capture_default_str();
    encrypt->add_option("--se-scale-bits", se_scale_bits, "stream-cipher message scale")
        ->capture_default_str();

    // decrypt
    auto* decrypt = app.add_subcommand("decrypt", "decrypt either ciphertext format");
    std::string dec_keys = "keys.bin", dec_in, dec_out = "msg.out.csv";
    size_t dec_lm = 0;
    decrypt->add_option("--keys", dec_keys, "key file")->capture_default_str();
    decrypt->add_option("--in", dec_in, "ciphertext file")->required();
    decrypt->add_option("--out", dec_out, "message file")->capture_default_str();
    decrypt->add_option("--lm", dec_lm, "slots to decode (lattice format)");

    // keystream
    auto* keystream = app.add_subcommand("keystream", "dump stream-cipher keystream words");
    std::string ks_preset = "128S", ks_key_hex, ks_nonce_hex;
    uint64_t ks_count = 0, ks_counter = 0;
    keystream->add_option("--preset", ks_preset, "128S|128M|128L")->capture_default_str();
    keystream->add_option("--key-hex", ks_key_hex, "key material, hex")->required();
    keystream->add_option("--nonce-hex", ks_nonce_hex, "16-byte nonce, hex")->required();
    keystream->add_option("--count", ks_count, "words to emit (default: one block)");
    keystream->add_option("--counter", ks_counter, "starting block counter")->capture_default_str();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run the accelerator model");
    std::string sim_workload = "ckks", sim_preset = "128S", sim_trace, sim_seed_hex = "00";
    std::string sim_cal_file;
    simulate->add_option("--workload", sim_workload, "ckks|rubato")->capture_default_str();
    simulate->add_option("--preset", sim_preset, "stream-cipher preset")->capture_default_str();
    simulate->add_option("--trace", sim_trace, "write the task trace CSV here");
    simulate->add_option("--seed", sim_seed_hex, "hex seed for sampling")->capture_default_str();
    simulate->add_option("--calibration", sim_cal_file, "calibration JSON override");

    // report
    auto* report = app.add_subcommand("report", "latency and crossover analysis");
    report->require_subcommand(1);
    auto* latency = report->add_subcommand("latency", "standalone vs near-network latency");
    std::string lat_bus = "1x64", lat_approach = "standalone", lat_dir = "both", lat_out;
    latency->add_option("--bus", lat_bus, "1x64|1x128|1x256|2x64|2x128|2x256")->capture_default_str();
    latency->add_option("--approach", lat_approach, "standalone|nearnet")->capture_default_str();
    latency->add_option("--direction", lat_dir, "m2ct|ct2m|both")->capture_default_str();
    latency->add_option("--out", lat_out, "also write CSV here");
    auto* sweep = report->add_subcommand("sweep", "near-network speedup across bus configs");
    std::string sweep_out;
    sweep->add_option("--out", sweep_out, "also write CSV here");
    auto* crossover = report->add_subcommand("crossover", "stream cipher vs lattice crossover");
    std::string cross_out, cross_bus = "1x64";
    bool cross_table = false;
    crossover->add_option("--out", cross_out, "also write CSV here");
    crossover->add_option("--bus", cross_bus, "bus profile for the end-to-end columns")
        ->capture_default_str();
    crossover->add_flag("--table", cross_table, "use measured compute constants instead of simulating");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (primes->parsed()) {
        auto found = field::find_rns_primes(k, uint64_t(1) << log_n, bnd_bits);
        std::ostringstream csv;
        csv << "bnd,q,delta,mu\n";
        for (const auto& p : found)
            csv << p.bnd << ',' << p.q << ',' << p.delta << ',' << p.mu << '\n';
        if (primes_out.empty()) {
            std::cout << csv.str();
        } else {
            std::ofstream f(primes_out);
            f << csv.str();
            std::cout << "wrote " << found.size() << " primes to " << primes_out << '\n';
        }
        return 0;
    }

    if (keygen->parsed()) {
        auto ctx = make_context();
        auto seed = rng::parse_hex(kg_seed);
        auto keys = ckks::keygen(seed, ctx);
        std::ofstream f(kg_out, std::ios::binary);
        if (!f) throw FormatError("cannot open key file " + kg_out, 0);
        ckks::write_keyfile(f, keys, ctx);
        std::cout << "keys written to " << kg_out << '\n';
        return 0;
    }

    if (encrypt->parsed()) {
        auto ctx = make_context();
        std::ifstream kf(enc_keys, std::ios::binary);
        if (!kf) throw FormatError("cannot open key file " + enc_keys, 0);
        auto keys = ckks::read_keyfile(kf, ctx);
        auto msg = read_message_file(enc_in);
        if (enc_lm && enc_lm != msg.size()) msg.resize(enc_lm, 0.0);

        hhe::SessionConfig cfg;
        cfg.message_length = msg.size();
        cfg.cloud_load = enc_cloud == "low" ? hhe::CloudLoad::low : hhe::CloudLoad::high;
        cfg.bus = netmodel::parse_bus(enc_bus);
        cfg.preset = rubato::Params::parse(enc_preset).preset;
        cfg.se_scale_bits = se_scale_bits;

        auto enc_seed = rng::parse_hex(enc_seed_hex);
        std::vector<uint8_t> nonce;
        if (enc_nonce.empty()) {
            xof::Shake128 x(enc_seed);
            x.absorb(std::string_view("nonce"));
            nonce = x.squeeze(16);
        } else {
            nonce = rng::parse_hex(enc_nonce);
        }
        auto se_key = rubato::derive_key(keys.seed, rubato::Params::get(cfg.preset));

        std::optional<hhe::Mode> forced;
        if (enc_mode == "ckks")
            forced = hhe::Mode::CKKS;
        else if (enc_mode == "rubato")
            forced = hhe::Mode::RUBATO_SE;
        else if (enc_mode != "auto")
            throw ParameterError("unknown mode " + enc_mode);
        auto ct = hhe::hhe_encrypt(msg, cfg, ctx, keys, se_key, nonce, enc_seed, forced);

        std::cout << "mode: " << hhe::mode_name(ct.mode) << '\n';
        if (ct.mode == hhe::Mode::CKKS) {
            std::ofstream f(enc_out, std::ios::binary);
            if (!f) throw FormatError("cannot open output " + enc_out, 0);
            ckks::write_ciphertext(f, *ct.lattice, ctx);
        } else {
            write_se_file(enc_out, *ct.stream);
        }
        std::cout << "ciphertext written to " << enc_out << '\n';
        return 0;
    }

    if (decrypt->parsed()) {
        auto ctx = make_context();
        std::ifstream kf(dec_keys, std::ios::binary);
        if (!kf) throw FormatError("cannot open key file " + dec_keys, 0);
        auto keys = ckks::read_keyfile(kf, ctx);

        std::ifstream f(dec_in, std::ios::binary);
        if (!f) throw FormatError("cannot open ciphertext " + dec_in, 0);
        char magic[4];
        f.read(magic, 4);
        if (!f) throw FormatError("truncated ciphertext", 0);

        std::vector<double> values;
        if (std::memcmp(magic, kSeMagic, 4) == 0) {
            auto se = read_se_file(f);
            auto params = rubato::Params::get(se.preset);
            auto se_key = rubato::derive_key(keys.seed, params);
            hhe::HybridCiphertext ct;
            ct.mode = hhe::Mode::RUBATO_SE;
            ct.stream = se;
            hhe::SessionConfig cfg;
            cfg.message_length = se.message_length;
            values = hhe::hhe_decrypt(ct, cfg, ctx, keys, se_key);
        } else {
            f.seekg(0);
            auto lattice = ckks::read_ciphertext(f, ctx);
            auto slots = ckks::decode(ckks::decrypt(lattice, keys, ctx), ctx, dec_lm);
            values.resize(slots.size());
            for (size_t i = 0; i < slots.size(); ++i) values[i] = slots[i].real();
        }
        write_message_file(dec_out, values);
        std::cout << "decrypted " << values.size() << " values to " << dec_out << '\n';
        return 0;
    }

    if (keystream->parsed()) {
        auto params = rubato::Params::parse(ks_preset);
        auto key = rubato::derive_key(rng::parse_hex(ks_key_hex), params);
        auto nonce = rng::parse_hex(ks_nonce_hex);
        if (ks_count == 0) ks_count = params.l;
        std::vector<uint64_t> words;
        uint64_t counter = ks_counter;
        while (words.size() < ks_count) {
            auto block = rubato::keystream(key, nonce, counter++, params);
            words.insert(words.end(), block.begin(), block.end());
        }
        words.resize(ks_count);
        for (size_t i = 0; i < words.size(); ++i)
            std::cout << words[i] << (i + 1 < words.size() ? ',' : '\n');
        return 0;
    }

    if (simulate->parsed()) {
        auto cal = sim_cal_file.empty() ? accelsim::Calibration::defaults()
                                        : accelsim::Calibration::from_json_file(sim_cal_file);
        auto seed = rng::parse_hex(sim_seed_hex);
        if (sim_workload == "rubato") {
            auto params = rubato::Params::parse(sim_preset);
            auto key = rubato::derive_key(seed, params);
            std::vector<uint8_t> nonce(16, 0);
            auto res = accelsim::run_rubato_schedule(params.preset, key, nonce, 0, cal);
            std::cout << "workload: rubato preset: " << sim_preset << '\n';
            print_report("keystream-block", res.report);
            if (!sim_trace.empty()) {
                std::ofstream tf(sim_trace);
                accelsim::trace_export(res.report, tf);
            }
        } else if (sim_workload == "ckks") {
            auto ctx = make_context();
            auto keys = ckks::keygen(seed.empty() ? std::vector<uint8_t>{1} : seed, ctx);
            rng::Sampler msg_rng(seed, "sim-msg");
            std::vector<std::complex<double>> msg(4096);
            for (auto& m : msg)
                m = {msg_rng.canonical_double() * 2 - 1, msg_rng.canonical_double() * 2 - 1};
            auto res = accelsim::run_ckks_workflow(ctx, keys, msg, seed, cal);
            std::cout << "workload: ckks N=8192 bases=3\n";
            print_report("m-to-ct", res.m2ct);
            print_report("ct-to-m", res.ct2m);
            if (!sim_trace.empty()) {
                std::ofstream tf(sim_trace);
                accelsim::trace_export(res.m2ct, tf);
            }
        } else {
            throw ParameterError("unknown workload " + sim_workload);
        }
        return 0;
    }

    if (latency->parsed()) {
        auto cal = netmodel::CalibrationTable::builtin();
        auto bus = netmodel::parse_bus(lat_bus);
        std::ostringstream csv;
        csv << "direction,bus,approach,overall_cycles,transfer_cycles,transfer_pct\n";
        auto emit = [&](netmodel::Direction d, const char* name) {
            auto scenario = netmodel::table_scenario(d, bus, cal);
            netmodel::LatencyReport r = lat_approach == "nearnet"
                                            ? netmodel::near_network_latency(scenario, cal)
                                            : netmodel::standalone_latency(scenario, bus, cal);
            std::cout << name << " over " << lat_bus << " (" << lat_approach << "): overall "
                      << r.overall_cycles << " cycles, transfer " << r.transfer_cycles << " ("
                      << r.transfer_percentage * 100.0 << "%)\n";
            csv << name << ',' << lat_bus << ',' << lat_approach << ',' << r.overall_cycles << ','
                << r.transfer_cycles << ',' << r.transfer_percentage * 100.0 << '\n';
        };
        if (lat_dir != "ct2m") emit(netmodel::Direction::m_to_ct_to_cloud, "m-to-ct-to-cloud");
        if (lat_dir != "m2ct") emit(netmodel::Direction::cloud_to_ct_to_m, "cloud-to-ct-to-m");
        if (!lat_out.empty()) {
            std::ofstream f(lat_out);
            f << csv.str();
        }
        return 0;
    }

    if (sweep->parsed()) {
        auto cal = netmodel::CalibrationTable::builtin();
        auto rows = netmodel::speedup_sweep(cal);
        std::ostringstream csv;
        csv << "direction,bus,standalone_cycles,nearnet_cycles,speedup\n";
        for (const auto& r : rows) {
            const char* dir = r.direction == netmodel::Direction::m_to_ct_to_cloud
                                  ? "m-to-ct-to-cloud"
                                  : "cloud-to-ct-to-m";
            std::cout << dir << ' ' << netmodel::bus_name(r.bus) << ": " << r.standalone_cycles
                      << " -> " << r.nearnet_cycles << " (speedup " << r.speedup << ")\n";
            csv << dir << ',' << netmodel::bus_name(r.bus) << ',' << r.standalone_cycles << ','
                << r.nearnet_cycles << ',' << r.speedup << '\n';
        }
        if (!sweep_out.empty()) {
            std::ofstream f(sweep_out);
            f << csv.str();
        }
        return 0;
    }

    if (crossover->parsed()) {
        auto cal = netmodel::CalibrationTable::builtin();
        hhe::CrossoverInputs inputs;
        if (cross_table) {
            inputs.ckks_m2ct_cycles = cal.compute_m2ct;
            inputs.rubato_block_cycles_s = 1235;
            inputs.rubato_block_cycles_m = 2087;
            inputs.rubato_block_cycles_l = 3036;
        } else {
            auto ctx = make_context();
            auto keys = ckks::keygen(std::vector<uint8_t>{1}, ctx);
            std::vector<std::complex<double>> msg(4096, {0.1, 0.0});
            auto wf = accelsim::run_ckks_workflow(ctx, keys, msg, {2});
            inputs.ckks_m2ct_cycles = double(wf.m2ct.compute_cycles);
            std::vector<uint8_t> nonce(16, 0);
            for (auto pr : {rubato::Preset::k128S, rubato::Preset::k128M, rubato::Preset::k128L}) {
                auto params = rubato::Params::get(pr);
                auto key = rubato::derive_key(std::vector<uint8_t>{3}, params);
                auto res = accelsim::run_rubato_schedule(pr, key, nonce, 0);
                double cycles = double(res.report.total_cycles);
                if (pr == rubato::Preset::k128S)
                    inputs.rubato_block_cycles_s = cycles;
                else if (pr == rubato::Preset::k128M)
                    inputs.rubato_block_cycles_m = cycles;
                else
                    inputs.rubato_block_cycles_l = cycles;
            }
        }
        auto rows = hhe::crossover_report(inputs, cal, netmodel::parse_bus(cross_bus));
        std::ostringstream csv;
        csv << "message_length,preset,segments,rubato_cycles,ckks_cycles,compute_speedup,"
               "rubato_e2e,ckks_e2e,e2e_speedup\n";
        for (const auto& r : rows) {
            const char* preset = r.preset == rubato::Preset::k128S
                                     ? "128S"
                                     : (r.preset == rubato::Preset::k128M ? "128M" : "128L");
            std::cout << "L_m=" << r.message_length << " (" << preset << ", " << r.segments
                      << " segs): compute speedup " << r.compute_speedup << ", end-to-end "
                      << r.e2e_speedup << '\n';
            csv << r.message_length << ',' << preset << ',' << r.segments << ',' << r.rubato_cycles
                << ',' << r.ckks_cycles << ',' << r.compute_speedup << ',' << r.rubato_e2e << ','
                << r.ckks_e2e << ',' << r.e2e_speedup << '\n';
        }
        if (!cross_out.empty()) {
            std::ofstream f(cross_out);
            f << csv.str();
        }
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const OverflowError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
}

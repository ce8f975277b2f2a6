// SPDX-License-Identifier: Apache-2.0
#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hhekit/accelsim.hpp"
#include "hhekit/ckks.hpp"
#include "hhekit/field.hpp"
#include "hhekit/hhe.hpp"
#include "hhekit/netmodel.hpp"
#include "hhekit/rng.hpp"
#include "hhekit/rubato.hpp"
#include "hhekit/transforms.hpp"
#include "hhekit/xof.hpp"

namespace py = pybind11;
using namespace hhekit;

namespace {

std::vector<uint8_t> to_bytes(const py::bytes& b) {
    std::string s = b;
    return {s.begin(), s.end()};
}

rubato::Params params_of(const std::string& preset) { return rubato::Params::parse(preset); }

}  // namespace

PYBIND11_MODULE(_hhekit, m) {
    m.doc() = "edge-side hybrid homomorphic encryption toolkit";

    // field
    py::class_<field::PrimeSpec>(m, "PrimeSpec")
        .def_readonly("k", &field::PrimeSpec::k)
        .def_readonly("ring_degree", &field::PrimeSpec::ring_degree)
        .def_readonly("bnd", &field::PrimeSpec::bnd)
        .def_readonly("q", &field::PrimeSpec::q)
        .def_readonly("delta", &field::PrimeSpec::delta)
        .def_readonly("mu", &field::PrimeSpec::mu)
        .def_readonly("delta_prime", &field::PrimeSpec::delta_prime)
        .def_readonly("delta_aligned", &field::PrimeSpec::delta_aligned)
        .def_static("make", &field::PrimeSpec::make)
        .def_static("from_q", &field::PrimeSpec::from_q);

    m.def("find_rns_primes", &field::find_rns_primes, py::arg("k"), py::arg("ring_degree"),
          py::arg("bnd_bits"));
    m.def("compute_delta", &field::compute_delta, py::arg("k"), py::arg("ring_degree"),
          py::arg("bnd"));
    m.def("is_prime_u64", &field::is_prime_u64);
    m.def("barrett_reduce", [](uint64_t hi, uint64_t lo, const field::PrimeSpec& spec) {
        return field::barrett_reduce((field::u128(hi) << 64) | lo, spec);
    }, py::arg("hi"), py::arg("lo"), py::arg("spec"),
       "reduce the 128-bit value hi*2^64 + lo modulo spec.q");
    m.def("mod_mul", &field::mod_mul);
    m.def("mod_add", &field::mod_add);
    m.def("mod_sub", &field::mod_sub);

    m.def("shake128", [](const py::bytes& seed, size_t n) {
        auto out = xof::shake128(to_bytes(seed), n);
        return py::bytes(reinterpret_cast<const char*>(out.data()), out.size());
    });

    // transforms
    m.def("ntt_negacyclic_mul",
          [](const std::vector<uint64_t>& a, const std::vector<uint64_t>& b, uint64_t q,
             uint64_t ring_degree_of_q) {
              auto spec = field::PrimeSpec::from_q(q, ring_degree_of_q);
              auto table = transforms::NttTable::make(spec, a.size());
              transforms::Polynomial pa{a, transforms::Domain::coefficient, 0};
              transforms::Polynomial pb{b, transforms::Domain::coefficient, 0};
              auto prod = transforms::pointwise_mul(transforms::ntt(pa, table),
                                                    transforms::ntt(pb, table), spec);
              return transforms::intt(prod, table).coeffs;
          },
          "negacyclic polynomial product via the NTT path");

    // ckks
    py::class_<ckks::Context>(m, "CkksContext")
        .def(py::init([](size_t slots, unsigned scale_bits, size_t levels) {
                 ckks::EncodingParams p;
                 p.slots = slots;
                 p.scale_bits = scale_bits;
                 p.basis = field::RnsBasis::standard(levels);
                 return std::make_unique<ckks::Context>(p);
             }),
             py::arg("slots") = 4096, py::arg("scale_bits") = 54, py::arg("levels") = 3)
        .def_property_readonly("basis_count", &ckks::Context::basis_count);

    py::class_<ckks::KeyMaterial>(m, "CkksKeys");
    py::class_<ckks::Plaintext>(m, "CkksPlaintext");
    py::class_<ckks::Ciphertext>(m, "CkksCiphertext")
        .def_property_readonly("level", &ckks::Ciphertext::level);

    m.def("ckks_keygen", [](const py::bytes& seed, const ckks::Context& ctx) {
        return ckks::keygen(to_bytes(seed), ctx);
    });
    m.def("ckks_encode", [](const std::vector<std::complex<double>>& msg, const ckks::Context& ctx) {
        return ckks::encode(msg, ctx);
    });
    m.def("ckks_decode", [](const ckks::Plaintext& pt, const ckks::Context& ctx, size_t n) {
        return ckks::decode(pt, ctx, n);
    }, py::arg("pt"), py::arg("ctx"), py::arg("message_len") = 0);
    m.def("ckks_encrypt", [](const ckks::Plaintext& pt, const ckks::KeyMaterial& keys,
                             const ckks::Context& ctx, const py::bytes& seed) {
        return ckks::encrypt(pt, keys, ctx, to_bytes(seed));
    });
    m.def("ckks_decrypt", &ckks::decrypt);

    // rubato
    m.def("rubato_keystream",
          [](const std::string& preset, const std::vector<uint64_t>& key, const py::bytes& nonce,
             uint64_t counter) {
              return rubato::keystream(key, to_bytes(nonce), counter, params_of(preset));
          },
          py::arg("preset"), py::arg("key"), py::arg("nonce"), py::arg("counter") = 0);
    m.def("rubato_derive_key", [](const std::string& preset, const py::bytes& material) {
        return rubato::derive_key(to_bytes(material), params_of(preset));
    });
    m.def("rubato_round_constants",
          [](const std::string& preset, const py::bytes& nonce, uint64_t counter) {
              return rubato::derive_round_constants(to_bytes(nonce), counter, params_of(preset)).rc;
          });
    m.def("rubato_se_encrypt",
          [](const std::vector<double>& msg, const std::vector<uint64_t>& key,
             const py::bytes& nonce, uint64_t counter, unsigned scale_bits,
             const std::string& preset) {
              return rubato::se_encrypt(msg, key, to_bytes(nonce), counter, scale_bits,
                                        params_of(preset));
          });
    m.def("rubato_se_decrypt",
          [](const std::vector<uint64_t>& words, const std::vector<uint64_t>& key,
             const py::bytes& nonce, uint64_t counter, unsigned scale_bits,
             const std::string& preset) {
              return rubato::se_decrypt(words, key, to_bytes(nonce), counter, scale_bits,
                                        params_of(preset));
          });
    m.def("rubato_params", [](const std::string& preset) {
        auto p = params_of(preset);
        return py::dict(py::arg("v") = p.v, py::arg("n") = p.n, py::arg("l") = p.l,
                        py::arg("log_t") = p.log_t, py::arg("rounds") = p.rounds,
                        py::arg("t") = p.t.t());
    });

    // hhe
    py::enum_<hhe::Mode>(m, "Mode").value("CKKS", hhe::Mode::CKKS).value("RUBATO_SE",
                                                                         hhe::Mode::RUBATO_SE);
    m.def("select_mode", [](size_t message_length, const std::string& cloud_load,
                            const std::string& bus) {
        hhe::SessionConfig cfg;
        cfg.message_length = message_length;
        cfg.cloud_load = cloud_load == "low" ? hhe::CloudLoad::low : hhe::CloudLoad::high;
        cfg.bus = netmodel::parse_bus(bus);
        return hhe::select_mode(cfg);
    }, py::arg("message_length"), py::arg("cloud_load") = "high", py::arg("bus") = "2x256");

    // netmodel
    m.def("ens", &netmodel::ens, py::arg("lut"), py::arg("ff"), py::arg("dsp"), py::arg("bram"));
    m.def("encapsulate", [](const std::vector<uint64_t>& words, size_t header, size_t segment) {
        auto out = netmodel::encapsulate(words, netmodel::PacketFormat{header, segment});
        return py::bytes(reinterpret_cast<const char*>(out.data()), out.size());
    }, py::arg("words"), py::arg("header_bytes") = 16, py::arg("segment_words") = 1024);
    m.def("decapsulate", [](const py::bytes& data, size_t header, size_t segment) {
        auto bytes = to_bytes(data);
        return netmodel::decapsulate(bytes, netmodel::PacketFormat{header, segment});
    }, py::arg("data"), py::arg("header_bytes") = 16, py::arg("segment_words") = 1024);
    m.def("standalone_latency", [](const std::string& direction, const std::string& bus) {
        auto cal = netmodel::CalibrationTable::builtin();
        auto d = direction == "m2ct" ? netmodel::Direction::m_to_ct_to_cloud
                                     : netmodel::Direction::cloud_to_ct_to_m;
        auto b = netmodel::parse_bus(bus);
        auto r = netmodel::standalone_latency(netmodel::table_scenario(d, b, cal), b, cal);
        return py::dict(py::arg("overall_cycles") = r.overall_cycles,
                        py::arg("transfer_cycles") = r.transfer_cycles,
                        py::arg("transfer_pct") = r.transfer_percentage * 100.0);
    });
    m.def("speedup_sweep", [] {
        py::list rows;
        for (const auto& r : netmodel::speedup_sweep(netmodel::CalibrationTable::builtin()))
            rows.append(py::dict(
                py::arg("bus") = netmodel::bus_name(r.bus),
                py::arg("direction") =
                    r.direction == netmodel::Direction::m_to_ct_to_cloud ? "m2ct" : "ct2m",
                py::arg("standalone") = r.standalone_cycles, py::arg("nearnet") = r.nearnet_cycles,
                py::arg("speedup") = r.speedup));
        return rows;
    });

    // accelsim
    m.def("simulate_rubato", [](const std::string& preset, const py::bytes& key_material,
                                const py::bytes& nonce) {
        auto params = params_of(preset);
        auto key = rubato::derive_key(to_bytes(key_material), params);
        auto res = accelsim::run_rubato_schedule(params.preset, key, to_bytes(nonce), 0);
        return py::dict(py::arg("total_cycles") = res.report.total_cycles,
                        py::arg("keystream") = res.keystream);
    });
    m.def("simulate_ckks", [](const py::bytes& keygen_seed, const py::bytes& enc_seed) {
        ckks::Context c{ckks::EncodingParams{}};
        auto keys = ckks::keygen(to_bytes(keygen_seed), c);
        std::vector<std::complex<double>> msg(4096, {0.125, -0.25});
        auto res = accelsim::run_ckks_workflow(c, keys, msg, to_bytes(enc_seed));
        return py::dict(py::arg("m2ct_cycles") = res.m2ct.compute_cycles,
                        py::arg("ct2m_cycles") = res.ct2m.compute_cycles,
                        py::arg("m2ct_total") = res.m2ct.total_cycles);
    });
}

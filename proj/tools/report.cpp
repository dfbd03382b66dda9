// Copyright 2026 The iontherm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "report.hpp"

#include <array>
#include <cmath>
#include <memory>

#include <openssl/evp.h>

#include "iontherm/error.hpp"

namespace iontherm::cli {

namespace {

double finite(double value, std::string_view field) {
    if (!std::isfinite(value)) {
        throw Error(ErrorKind::invalid_parameter, "report field " + std::string(field) + " is not finite");
    }
    return value;
}

template <typename T>
std::optional<T> optional_field(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key)) {
        return std::nullopt;
    }
    return doc.at(key).get<T>();
}

}  // namespace

nlohmann::json to_json(const FitReport& r) {
    nlohmann::json doc;
    doc["method"] = r.method;
    doc["status"] = r.status;
    doc["input_sha256"] = r.input_sha256;
    doc["version"] = r.version;
    if (r.model) {
        doc["model"] = *r.model;
    }
    if (r.nbar) {
        doc["nbar"] = finite(*r.nbar, "nbar");
    }
    if (r.nbar_uncertainty) {
        doc["nbar_uncertainty"] = finite(*r.nbar_uncertainty, "nbar_uncertainty");
    }
    if (!r.parameters.empty()) {
        nlohmann::json params = nlohmann::json::object();
        for (const auto& [key, value] : r.parameters) {
            params[key] = finite(value, key);
        }
        doc["parameters"] = params;
    }
    if (r.chi_square) {
        doc["chi_square"] = finite(*r.chi_square, "chi_square");
    }
    if (r.dof) {
        doc["dof"] = *r.dof;
    }
    if (r.seed) {
        doc["seed"] = *r.seed;
    }
    if (r.bootstrap) {
        const auto& b = *r.bootstrap;
        doc["bootstrap"] = {{"replicas", b.replicas},
                            {"failures", b.failures},
                            {"mean_nbar", finite(b.mean_nbar, "mean_nbar")},
                            {"stddev_nbar", finite(b.stddev_nbar, "stddev_nbar")},
                            {"seed", b.seed}};
    }
    if (r.error_kind || r.error_message) {
        doc["error"] = {{"kind", r.error_kind.value_or("")}, {"message", r.error_message.value_or("")}};
    }
    return doc;
}

FitReport report_from_json(const nlohmann::json& doc) {
    try {
        FitReport r;
        r.method = doc.at("method").get<std::string>();
        r.status = doc.at("status").get<std::string>();
        r.input_sha256 = doc.at("input_sha256").get<std::string>();
        r.version = doc.at("version").get<std::string>();
        r.model = optional_field<std::string>(doc, "model");
        r.nbar = optional_field<double>(doc, "nbar");
        r.nbar_uncertainty = optional_field<double>(doc, "nbar_uncertainty");
        if (doc.contains("parameters")) {
            r.parameters = doc.at("parameters").get<std::map<std::string, double>>();
        }
        r.chi_square = optional_field<double>(doc, "chi_square");
        r.dof = optional_field<int>(doc, "dof");
        r.seed = optional_field<std::uint64_t>(doc, "seed");
        if (doc.contains("bootstrap")) {
            const auto& b = doc.at("bootstrap");
            r.bootstrap = BootstrapReport{b.at("replicas").get<int>(), b.at("failures").get<int>(),
                                          b.at("mean_nbar").get<double>(), b.at("stddev_nbar").get<double>(),
                                          b.at("seed").get<std::uint64_t>()};
        }
        if (doc.contains("error")) {
            r.error_kind = doc.at("error").at("kind").get<std::string>();
            r.error_message = doc.at("error").at("message").get<std::string>();
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse_error, std::string("malformed fit report: ") + e.what());
    }
}

std::string serialize_report(const FitReport& report) {
    return to_json(report).dump(2) + "\n";
}

FitReport parse_report(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::parse_error, std::string("malformed fit report: ") + e.what());
    }
    return report_from_json(doc);
}

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    const std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1) {
        throw Error(ErrorKind::numerical_accuracy, "SHA-256 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

}  // namespace iontherm::cli

// JSON (de)serialization of distribution specs, kept out of the core headers
// so the library itself stays dependency-free.
#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "flpsr/distribution.hpp"

namespace flpsr {

inline DistributionSpec spec_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind")) {
        throw std::invalid_argument("distribution spec: expected an object with a \"kind\" field");
    }
    DistributionSpec spec;
    const std::string kind = j.at("kind").get<std::string>();
    if (j.contains("grid_resolution")) spec.grid_resolution = j.at("grid_resolution").get<int>();

    if (kind == "uniform") {
        spec.kind = DistKind::Uniform;
    } else if (kind == "beta") {
        spec.kind = DistKind::Beta;
        spec.alpha = j.at("alpha").get<double>();
        spec.beta = j.at("beta").get<double>();
    } else if (kind == "piecewise_linear_density") {
        spec.kind = DistKind::PiecewiseLinearDensity;
        for (const auto& knot : j.at("knots")) {
            if (!knot.is_array() || knot.size() != 2) {
                throw std::invalid_argument("distribution spec: knots must be [x, f] pairs");
            }
            spec.knots.emplace_back(knot[0].get<double>(), knot[1].get<double>());
        }
    } else if (kind == "param_mixture") {
        spec.kind = DistKind::ParamMixture;
        spec.family = j.at("family").get<std::string>();
        spec.param_density_poly = j.at("param_density_poly").get<std::vector<double>>();
    } else {
        throw std::invalid_argument("distribution spec: unknown kind \"" + kind + "\"");
    }
    return spec;
}

inline DistributionSpec spec_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("distribution spec: invalid JSON: ") + e.what());
    }
    return spec_from_json(j);
}

}  // namespace flpsr

#pragma once

#include <string_view>

namespace geoaudit::embedded {

// Contents of the files under data/ at build time.
extern const std::string_view kRegionMapCsv;
extern const std::string_view kCountryPointsCsv;
extern const std::string_view kDialectsConf;

}  // namespace geoaudit::embedded

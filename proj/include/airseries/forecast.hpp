#pragma once

#include <airseries/series.hpp>

namespace airseries {

/// Point forecasts with Gaussian bands.
struct Forecast {
    TimeSeries point;
    TimeSeries lower;
    TimeSeries upper;
};

} // namespace airseries

#pragma once

#include <airseries/arima.hpp>
#include <airseries/correlogram.hpp>
#include <airseries/criteria.hpp>
#include <airseries/decomposition.hpp>
#include <airseries/error.hpp>
#include <airseries/ets.hpp>
#include <airseries/evaluation.hpp>
#include <airseries/forecast.hpp>
#include <airseries/ingest.hpp>
#include <airseries/io.hpp>
#include <airseries/optimizer.hpp>
#include <airseries/series.hpp>
#include <airseries/special.hpp>
#include <airseries/study.hpp>
#include <airseries/synthetic.hpp>

#pragma once

#include <iat/calibration.hpp>
#include <iat/detectors.hpp>
#include <iat/errors.hpp>
#include <iat/evaluation.hpp>
#include <iat/features.hpp>
#include <iat/metrics.hpp>
#include <iat/pipeline.hpp>
#include <iat/scoring.hpp>
#include <iat/service.hpp>
#include <iat/session.hpp>
#include <iat/session_io.hpp>
#include <iat/simulator.hpp>
#include <iat/stats.hpp>
#include <iat/store.hpp>
#include <iat/strategies.hpp>

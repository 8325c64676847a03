#pragma once

// Speedup-at-progress: compare how long two propagators need to reach the
// same normalized progress level.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "propmeter/progress.hpp"

namespace propmeter
{

/// Times below this are floored when forming ratios (clock resolution).
inline constexpr double kMinTimeNs = 1000.0;

/// Smallest raw wall-clock time (ns) at which the interpolated curve reaches
/// progress x, for x in (0, 100]. x = 100 returns the full run time. Returns
/// nullopt if the curve never reaches x or x is out of range.
inline std::optional<double>
time_at_progress( const ProgressCurve& curve, double x )
{
   if( !( x > 0.0 ) || x > 100.0 || curve.samples.size() < 2 )
      return std::nullopt;
   if( x == 100.0 )
   {
      if( curve.samples.back().progress < 100.0 )
         return std::nullopt;
      return curve.total_time_ns();
   }
   const auto& s = curve.samples;
   for( std::size_t i = 1; i < s.size(); ++i )
   {
      if( s[i].progress >= x )
      {
         const double dp = s[i].progress - s[i - 1].progress;
         const double frac = ( x - s[i - 1].progress ) / dp;
         return s[i - 1].time_ns + frac * ( s[i].time_ns - s[i - 1].time_ns );
      }
   }
   return std::nullopt;
}

struct Speedup
{
   double baseline_ns = 0.0;
   double candidate_ns = 0.0;
   double ratio = 1.0;
   /// One of the times was below kMinTimeNs and was floored.
   bool floored = false;
};

inline std::optional<Speedup>
speedup_at_progress( const ProgressCurve& baseline, const ProgressCurve& candidate, double x )
{
   auto tb = time_at_progress( baseline, x );
   auto tc = time_at_progress( candidate, x );
   if( !tb || !tc )
      return std::nullopt;
   Speedup s;
   s.baseline_ns = *tb;
   s.candidate_ns = *tc;
   s.floored = *tb < kMinTimeNs || *tc < kMinTimeNs;
   s.ratio = std::max( *tb, kMinTimeNs ) / std::max( *tc, kMinTimeNs );
   return s;
}

/// exp(mean(log(v))); nullopt for an empty set.
inline std::optional<double>
geometric_mean( std::span<const double> values )
{
   if( values.empty() )
      return std::nullopt;
   double acc = 0.0;
   for( double v : values )
      acc += std::log( v );
   return std::exp( acc / static_cast<double>( values.size() ) );
}

inline std::vector<double>
default_progress_grid()
{
   return { 10, 20, 30, 40, 50, 60, 70, 80, 90, 100 };
}

} // namespace propmeter

#pragma once

// Premature-stalling detection on finite progress curves.
//
// A run stalls prematurely with coefficients (p, q) at round r >= 2 if round r
// has no infinite-to-finite reduction, P'(t(r)) < p, and P''(x) > q for some
// sampled x >= t(r). Derivatives are taken on the curve's own (nonuniform)
// sample grid: second-order central differences inside, second-order
// one-sided differences at the ends (first order with only two samples).
// P'' is the same operator applied to the sampled P'.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "propmeter/progress.hpp"
#include "propmeter/propagator.hpp"

namespace propmeter
{

/// Derivative of samples y(t) on the grid t. Requires at least two strictly
/// increasing grid points; throws std::invalid_argument otherwise.
inline std::vector<double>
sampled_derivative( std::span<const double> t, std::span<const double> y )
{
   const std::size_t n = t.size();
   if( n != y.size() )
      throw std::invalid_argument( "sampled_derivative: size mismatch" );
   if( n < 2 )
      throw std::invalid_argument( "sampled_derivative: need at least two samples" );
   for( std::size_t i = 1; i < n; ++i )
      if( !( t[i] > t[i - 1] ) )
         throw std::invalid_argument( "sampled_derivative: grid must be strictly increasing" );

   std::vector<double> d( n );
   if( n == 2 )
   {
      d[0] = d[1] = ( y[1] - y[0] ) / ( t[1] - t[0] );
      return d;
   }

   for( std::size_t i = 1; i + 1 < n; ++i )
   {
      const double h1 = t[i] - t[i - 1];
      const double h2 = t[i + 1] - t[i];
      d[i] = -h2 / ( h1 * ( h1 + h2 ) ) * y[i - 1] + ( h2 - h1 ) / ( h1 * h2 ) * y[i] +
             h1 / ( h2 * ( h1 + h2 ) ) * y[i + 1];
   }
   {
      const double h1 = t[1] - t[0];
      const double h2 = t[2] - t[1];
      d[0] = -( 2 * h1 + h2 ) / ( h1 * ( h1 + h2 ) ) * y[0] + ( h1 + h2 ) / ( h1 * h2 ) * y[1] -
             h1 / ( h2 * ( h1 + h2 ) ) * y[2];
   }
   {
      const double h1 = t[n - 2] - t[n - 3];
      const double h2 = t[n - 1] - t[n - 2];
      d[n - 1] = h2 / ( h1 * ( h1 + h2 ) ) * y[n - 3] - ( h1 + h2 ) / ( h1 * h2 ) * y[n - 2] +
                 ( 2 * h2 + h1 ) / ( h2 * ( h1 + h2 ) ) * y[n - 1];
   }
   return d;
}

struct CurveDerivatives
{
   std::vector<double> t;
   std::vector<double> first;
   std::vector<double> second;
};

inline CurveDerivatives
curve_derivatives( const ProgressCurve& curve )
{
   CurveDerivatives out;
   std::vector<double> p;
   for( const auto& s : curve.samples )
   {
      out.t.push_back( s.t );
      p.push_back( s.progress );
   }
   out.first = sampled_derivative( out.t, p );
   out.second = sampled_derivative( out.t, out.first );
   return out;
}

struct StallParams
{
   double p = std::numeric_limits<double>::infinity();
   double q = 0.0;
};

struct StallRoundRecord
{
   std::size_t round = 0;
   double t = 0.0;
   double first_derivative = 0.0;
   bool no_lower_inf_reduction = false;
   bool no_upper_inf_reduction = false;
   bool slow = false;
   bool accelerates_later = false;

   bool
   stalls() const
   {
      return no_lower_inf_reduction && no_upper_inf_reduction && slow && accelerates_later;
   }
};

struct StallReport
{
   std::vector<StallRoundRecord> rounds;
   bool stalled = false;
   std::optional<std::size_t> first_stall_round;
};

/// Per-round infinite reductions split by side, indexed by round - 1.
struct RoundInfiniteReductions
{
   std::vector<std::size_t> lower;
   std::vector<std::size_t> upper;

   static RoundInfiniteReductions
   from_trace( const PropagationTrace& trace )
   {
      RoundInfiniteReductions out;
      for( const auto& r : trace.rounds )
      {
         std::size_t lo = 0, up = 0;
         for( const auto& c : r.changes )
            if( c.is_infinite_reduction() )
               ( c.side == BoundSide::kLower ? lo : up )++;
         out.lower.push_back( lo );
         out.upper.push_back( up );
      }
      return out;
   }
};

/// Evaluates the stalling conditions at every sampled round r >= 2. Rounds
/// dropped from the curve during normalization have no grid point and are not
/// evaluated. Throws std::invalid_argument if the curve refers to rounds the
/// trace does not have.
inline StallReport
detect_stall( const ProgressCurve& curve, const RoundInfiniteReductions& inf,
              const StallParams& params )
{
   if( inf.lower.size() != inf.upper.size() )
      throw std::invalid_argument( "detect_stall: malformed reduction counts" );
   for( const auto& s : curve.samples )
      if( s.round > inf.lower.size() )
         throw std::invalid_argument( "detect_stall: curve and trace lengths do not match" );

   const auto der = curve_derivatives( curve );
   const std::size_t n = der.t.size();

   // suffix_max[i] = max P'' over grid points i..n-1
   std::vector<double> suffix_max( n );
   double running = -std::numeric_limits<double>::infinity();
   for( std::size_t i = n; i-- > 0; )
   {
      running = std::max( running, der.second[i] );
      suffix_max[i] = running;
   }

   StallReport report;
   for( std::size_t i = 0; i < n; ++i )
   {
      const std::size_t r = curve.samples[i].round;
      if( r < 2 )
         continue;
      StallRoundRecord rec;
      rec.round = r;
      rec.t = der.t[i];
      rec.first_derivative = der.first[i];
      rec.no_lower_inf_reduction = inf.lower[r - 1] == 0;
      rec.no_upper_inf_reduction = inf.upper[r - 1] == 0;
      rec.slow = der.first[i] < params.p;
      rec.accelerates_later = suffix_max[i] > params.q;
      if( rec.stalls() && !report.stalled )
      {
         report.stalled = true;
         report.first_stall_round = r;
      }
      report.rounds.push_back( rec );
   }
   return report;
}

inline StallReport
detect_stall( const ProgressCurve& curve, const PropagationTrace& trace, const StallParams& params )
{
   return detect_stall( curve, RoundInfiniteReductions::from_trace( trace ), params );
}

/// Default parameter grid (p, q).
inline std::vector<StallParams>
default_stall_grid()
{
   const double inf = std::numeric_limits<double>::infinity();
   return { { inf, 0.0 }, { 0.1, 0.0 }, { 0.1, 0.2 }, { 0.1, 0.5 }, { 0.5, 0.5 }, { 0.5, 2.0 } };
}

struct StallInput
{
   const ProgressCurve* curve = nullptr;
   RoundInfiniteReductions reductions;
};

/// Number of stalled runs for each parameter pair, in grid order.
inline std::vector<std::size_t>
stall_sweep( std::span<const StallInput> runs, std::span<const StallParams> grid )
{
   std::vector<std::size_t> counts( grid.size(), 0 );
   for( const auto& run : runs )
      for( std::size_t g = 0; g < grid.size(); ++g )
         if( detect_stall( *run.curve, run.reductions, grid[g] ).stalled )
            ++counts[g];
   return counts;
}

} // namespace propmeter

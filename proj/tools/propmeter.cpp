// propmeter: propagation progress experiments from the command line.
//
//   propmeter run            --instances 'data/fixtures/*.txt' --out out/
//   propmeter compare        --instances ... --baseline immediate --candidate deferred
//   propmeter verify         --instances ...
//   propmeter stall          --instances ... --p 0.1,0.5 --q 0.2
//   propmeter weakest-bounds --instances ...

#include <glob.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "propmeter/harness.hpp"

namespace
{

using propmeter::ConfigError;

std::vector<std::filesystem::path>
expand_patterns( const std::vector<std::string>& patterns )
{
   std::vector<std::filesystem::path> paths;
   for( const auto& pat : patterns )
   {
      glob_t g{};
      const int rc = ::glob( pat.c_str(), GLOB_NOCHECK, nullptr, &g );
      if( rc == 0 )
         for( std::size_t i = 0; i < g.gl_pathc; ++i )
            paths.emplace_back( g.gl_pathv[i] );
      globfree( &g );
   }
   std::sort( paths.begin(), paths.end() );
   paths.erase( std::unique( paths.begin(), paths.end() ), paths.end() );
   return paths;
}

std::vector<double>
parse_list( const std::string& text, const char* what )
{
   std::vector<double> out;
   std::size_t pos = 0;
   while( pos <= text.size() )
   {
      const std::size_t comma = text.find( ',', pos );
      const std::string tok =
          text.substr( pos, comma == std::string::npos ? std::string::npos : comma - pos );
      if( tok == "inf" || tok == "+inf" )
         out.push_back( std::numeric_limits<double>::infinity() );
      else
      {
         auto v = propmeter::parse_double( tok );
         if( !v )
            throw ConfigError( std::string( "bad value in " ) + what + ": '" + tok + "'" );
         out.push_back( *v );
      }
      if( comma == std::string::npos )
         break;
      pos = comma + 1;
   }
   return out;
}

// --p and --q are zipped; a single value is repeated to the other list's length.
std::vector<propmeter::StallParams>
stall_grid_from( const std::string& p_text, const std::string& q_text )
{
   if( p_text.empty() && q_text.empty() )
      return propmeter::default_stall_grid();
   std::vector<double> ps = p_text.empty() ? std::vector<double>{ std::numeric_limits<double>::infinity() }
                                           : parse_list( p_text, "--p" );
   std::vector<double> qs = q_text.empty() ? std::vector<double>{ 0.0 } : parse_list( q_text, "--q" );
   if( ps.size() == 1 && qs.size() > 1 )
      ps.resize( qs.size(), ps[0] );
   if( qs.size() == 1 && ps.size() > 1 )
      qs.resize( ps.size(), qs[0] );
   if( ps.size() != qs.size() )
      throw ConfigError( "--p and --q must have the same length (or length 1)" );
   std::vector<propmeter::StallParams> grid;
   for( std::size_t i = 0; i < ps.size(); ++i )
      grid.push_back( { ps[i], qs[i] } );
   return grid;
}

struct Options
{
   std::vector<std::string> instances;
   std::string variant = "both";
   int max_rounds = 100;
   std::string stop = "fixpoint";
   double tau = 1e-3;
   std::string out;
   std::string progress_grid;
   std::string p;
   std::string q;
   unsigned workers = 1;
   std::string baseline = "immediate";
   std::string candidate = "deferred";
   int weakest_max_iterations = 100;
};

propmeter::ExperimentConfig
build_config( const Options& o )
{
   propmeter::ExperimentConfig cfg;
   cfg.instances = expand_patterns( o.instances );
   if( o.variant == "both" )
      cfg.variants = { propmeter::Variant::kImmediate, propmeter::Variant::kDeferred };
   else
   {
      auto v = propmeter::parse_variant( o.variant );
      if( !v )
         throw ConfigError( "unknown variant '" + o.variant + "'" );
      cfg.variants = { *v };
   }
   cfg.propagation.max_rounds = o.max_rounds;
   if( o.stop == "fixpoint" )
      cfg.propagation.stop_mode = propmeter::StopMode::kFixpoint;
   else if( o.stop == "tolerance" )
      cfg.propagation.stop_mode = propmeter::StopMode::kTolerance;
   else
      throw ConfigError( "unknown stop mode '" + o.stop + "'" );
   cfg.propagation.significance_rel_tol = o.tau;
   cfg.weakest.max_iterations = o.weakest_max_iterations;
   cfg.out_dir = o.out;
   if( !o.progress_grid.empty() )
      cfg.progress_grid = parse_list( o.progress_grid, "--progress-grid" );
   cfg.stall_grid = stall_grid_from( o.p, o.q );
   cfg.workers = o.workers;
   auto b = propmeter::parse_variant( o.baseline );
   auto c = propmeter::parse_variant( o.candidate );
   if( !b || !c )
      throw ConfigError( "unknown baseline or candidate variant" );
   cfg.baseline = *b;
   cfg.candidate = *c;
   return cfg;
}

void
print_load_problems( const std::vector<propmeter::InstanceRecord>& records )
{
   for( const auto& r : records )
   {
      if( !r.load_error.empty() )
         std::cerr << r.id << ": " << r.load_error << '\n';
      for( const auto& w : r.warnings )
         std::cerr << r.id << ": warning: " << w << '\n';
      for( const auto& o : r.outcomes )
         if( o.status == propmeter::OutcomeStatus::kFailed )
            std::cerr << r.id << " (" << propmeter::to_string( o.variant ) << "): " << o.message << '\n';
   }
}

std::string
show( const std::optional<double>& v )
{
   return v ? propmeter::format_double( *v ) : std::string( "-" );
}

} // namespace

int
main( int argc, char** argv )
{
   CLI::App app{ "Bounds propagation progress measurement" };
   app.require_subcommand( 1 );
   Options o;

   auto add_common = [&]( CLI::App* sub ) {
      sub->add_option( "--instances", o.instances, "Instance files or glob patterns (.mps or text)" )
          ->required();
      sub->add_option( "--variant", o.variant, "immediate | deferred | both" );
      sub->add_option( "--max-rounds", o.max_rounds, "Round limit per propagation run" );
      sub->add_option( "--stop", o.stop, "fixpoint | tolerance" );
      sub->add_option( "--tau", o.tau, "Significance threshold for tolerance stopping" );
      sub->add_option( "--out", o.out, "Output directory for CSV files" );
      sub->add_option( "--workers", o.workers, "Concurrent instances" );
      sub->add_option( "--weakest-max-iterations", o.weakest_max_iterations,
                       "Iteration cap for the weakest-bounds computation" );
   };

   auto* run = app.add_subcommand( "run", "Measure progress curves" );
   add_common( run );
   auto* compare = app.add_subcommand( "compare", "Speedup at progress levels" );
   add_common( compare );
   compare->add_option( "--progress-grid", o.progress_grid, "Comma-separated levels in (0,100]" );
   compare->add_option( "--baseline", o.baseline, "Numerator variant" );
   compare->add_option( "--candidate", o.candidate, "Denominator variant" );
   auto* verify = app.add_subcommand( "verify", "Check that variants reach the same fixed point" );
   add_common( verify );
   auto* stall = app.add_subcommand( "stall", "Premature stall counts over a (p, q) grid" );
   add_common( stall );
   stall->add_option( "--p", o.p, "Comma-separated p values (inf allowed)" );
   stall->add_option( "--q", o.q, "Comma-separated q values" );
   auto* weakest = app.add_subcommand( "weakest-bounds", "Weakest finite reference bounds" );
   add_common( weakest );

   CLI11_PARSE( app, argc, argv );

   propmeter::ExperimentConfig cfg;
   try
   {
      cfg = build_config( o );
   }
   catch( const ConfigError& e )
   {
      std::cerr << "error: " << e.what() << '\n';
      return propmeter::kExitInvalidConfig;
   }

   try
   {
      if( run->parsed() )
      {
         auto rep = propmeter::cmd_run( cfg );
         print_load_problems( rep.records );
         for( const auto& r : rep.records )
            for( const auto& v : r.outcomes )
               std::cout << r.id << ' ' << propmeter::to_string( v.variant ) << ' '
                         << propmeter::to_string( v.status ) << '\n';
         return rep.exit_code;
      }
      if( compare->parsed() )
      {
         auto rep = propmeter::cmd_compare( cfg );
         print_load_problems( rep.records );
         for( const auto& [id, why] : rep.excluded )
            std::cerr << id << ": excluded (" << why << ")\n";
         std::cout << "phase progress instances geomean\n";
         for( const auto& s : rep.summary )
            std::cout << propmeter::to_string( s.phase ) << ' ' << propmeter::format_double( s.progress )
                      << ' ' << s.included << ' ' << show( s.geometric_mean ) << '\n';
         return rep.exit_code;
      }
      if( verify->parsed() )
      {
         auto rep = propmeter::cmd_verify( cfg );
         for( const auto& r : rep.records )
         {
            std::cout << r.id << ' ' << propmeter::to_string( r.status );
            if( !r.message.empty() )
               std::cout << " (" << r.message << ')';
            std::cout << '\n';
         }
         return rep.exit_code;
      }
      if( stall->parsed() )
      {
         auto rep = propmeter::cmd_stall( cfg );
         print_load_problems( rep.records );
         std::cout << "p q stalls_immediate stalls_deferred\n";
         auto count = []( const std::optional<std::size_t>& c ) {
            return c ? std::to_string( *c ) : std::string( "-" );
         };
         for( const auto& r : rep.rows )
            std::cout << propmeter::format_double( r.params.p ) << ' '
                      << propmeter::format_double( r.params.q ) << ' ' << count( r.stalls_immediate )
                      << ' ' << count( r.stalls_deferred ) << '\n';
         return rep.exit_code;
      }
      if( weakest->parsed() )
      {
         auto rep = propmeter::cmd_weakest_bounds( cfg );
         for( const auto& r : rep.records )
         {
            if( !r.weakest )
            {
               std::cerr << r.id << ": " << r.error << '\n';
               continue;
            }
            if( cfg.out_dir.empty() )
            {
               std::cout << "# " << r.id << ( r.weakest->cap_hit ? " (iteration cap hit)" : "" ) << '\n';
               propmeter::write_weakest_csv( std::cout, *r.instance, *r.weakest );
            }
            else if( r.weakest->cap_hit )
               std::cerr << r.id << ": iteration cap hit\n";
         }
         return rep.exit_code;
      }
   }
   catch( const ConfigError& e )
   {
      std::cerr << "error: " << e.what() << '\n';
      return propmeter::kExitInvalidConfig;
   }
   catch( const std::exception& e )
   {
      std::cerr << "error: " << e.what() << '\n';
      return propmeter::kExitTotalFailure;
   }
   return propmeter::kExitSuccess;
}

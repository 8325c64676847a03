#pragma once

// The five golden instances, built in code. The same instances live as text
// files under data/fixtures.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "propmeter/problem.hpp"
#include "propmeter/text_format.hpp"

#ifndef PROPMETER_FIXTURE_DIR
#error "PROPMETER_FIXTURE_DIR must point at data/fixtures"
#endif

namespace propmeter::support
{

inline ExtReal
fin( double v )
{
   return ExtReal::from( v );
}

inline const ExtReal kPosInf = ExtReal::pos_inf();
inline const ExtReal kNegInf = ExtReal::neg_inf();

inline ProblemInstance
fix1()
{
   return build_instance( { { fin( 0 ), fin( 3 ), false }, { fin( 0 ), fin( 10 ), false } },
                          { { { { 0, 1.0 }, { 1, 1.0 } }, fin( 1 ), fin( 4 ) } },
                          { "x1", "x2" } );
}

inline ProblemInstance
fix2()
{
   return build_instance( { { fin( 0 ), kPosInf, false }, { fin( 1 ), kPosInf, false } },
                          { { { { 0, 1.0 }, { 1, 1.0 } }, kNegInf, fin( 5 ) } }, { "x1", "x2" } );
}

inline ProblemInstance
fix3()
{
   return build_instance( { { fin( 0 ), kPosInf, false }, { fin( 0 ), kPosInf, false } },
                          { { { { 0, 1.0 }, { 1, -1.0 } }, kNegInf, fin( 3 ) },
                            { { { 1, 1.0 } }, kNegInf, fin( 6 ) },
                            { { { 1, 1.0 } }, kNegInf, fin( 4 ) } },
                          { "x1", "x2" } );
}

inline ProblemInstance
fix4()
{
   return build_instance( { { fin( 0 ), fin( 10 ), true } }, { { { { 0, 2.0 } }, kNegInf, fin( 7 ) } },
                          { "x" } );
}

inline ProblemInstance
fix5()
{
   return build_instance( { { fin( 0 ), fin( 3 ), false } }, { { { { 0, 1.0 } }, fin( 5 ), kPosInf } },
                          { "x" } );
}

inline std::filesystem::path
fixture_path( const std::string& name )
{
   return std::filesystem::path( PROPMETER_FIXTURE_DIR ) / name;
}

inline std::string
read_file( const std::filesystem::path& p )
{
   std::ifstream in( p, std::ios::binary );
   std::stringstream buf;
   buf << in.rdbuf();
   return buf.str();
}

} // namespace propmeter::support

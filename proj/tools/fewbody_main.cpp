#include "fewbody/app.hpp"

int main(int argc, char** argv) { return fewbody::app::run(argc, argv); }

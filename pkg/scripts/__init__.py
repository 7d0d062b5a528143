# Scripts module - command-line entry point

import sys

# orbit values in the larger tests exceed the default int->str guard
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(2_000_000)

"""Layer scheduling for pipelined QC-LDPC layered decoders."""

__version__ = "0.1.0"

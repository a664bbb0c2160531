"""Dynamic radiomics: static ROI features over time turned into dynamic features."""

__version__ = "0.1.0"

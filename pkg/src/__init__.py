"""
locbench - Source Package
Bilingual corpus construction from game localization files, MT scoring and localization QA
"""

__version__ = "1.0.0"

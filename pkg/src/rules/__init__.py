"""
QA Check Modules
Contains check implementations for placeholders, terminology and French localization conventions
"""

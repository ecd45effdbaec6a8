"""
Pydantic models for run requests, scenario documents and reports
"""

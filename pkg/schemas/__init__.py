# Schemas module - Pydantic models for validation

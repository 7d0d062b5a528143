# Services module - density bounds, witnesses and verification

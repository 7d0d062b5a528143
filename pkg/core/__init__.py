# Core module - shared utilities and configurations

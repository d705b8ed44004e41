# Serialization schemas

# Construction module - addresses, removal families and example sets

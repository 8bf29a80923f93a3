namespace dgla {
}

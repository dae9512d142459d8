use super::SidError;

/// Longest common prefix of a set of hex cell ids.
pub fn shared_hex_prefix<S: AsRef<str>>(hex_ids: &[S]) -> Result<String, SidError> {
    let (first, rest) = hex_ids.split_first().ok_or(SidError::EmptyCatalog)?;
    let first = first.as_ref();
    let len = rest.iter().fold(first.len(), |len, other| {
        first
            .bytes()
            .zip(other.as_ref().bytes())
            .take(len)
            .take_while(|(a, b)| a == b)
            .count()
    });
    Ok(first[..len].to_string())
}

/// The `2 * geo_tokens` hex digits following the stripped prefix, read
/// pairwise as byte tokens.
pub fn geospatial_prefix(
    hex_id: &str,
    lcp_len: usize,
    geo_tokens: usize,
) -> Result<Vec<u8>, SidError> {
    let end = lcp_len + 2 * geo_tokens;
    if end > hex_id.len() {
        return Err(SidError::PrefixTooLong {
            lcp_len,
            geo_tokens,
            available: hex_id.len().saturating_sub(lcp_len),
        });
    }
    let digits = &hex_id[lcp_len..end];
    digits
        .as_bytes()
        .chunks(2)
        .map(|pair| {
            let pair =
                std::str::from_utf8(pair).map_err(|_| SidError::InvalidHex(hex_id.to_string()))?;
            u8::from_str_radix(pair, 16).map_err(|_| SidError::InvalidHex(hex_id.to_string()))
        })
        .collect()
}

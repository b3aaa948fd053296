from fastapi import APIRouter, HTTPException
from pydantic import BaseModel

from engines.bignum import from_decimal_string
from engines.errors import ArithmeticTaskError, MalformedSequence
from engines.orthography import OrthographySpec, decode, encode, position_token
from engines.tokens import TokenSequence
from engines.words import number_to_words

router = APIRouter(prefix="/api", tags=["codec"])


class EncodeRequest(BaseModel):
    number: str
    orthography: OrthographySpec


class DecodeRequest(BaseModel):
    tokens: str
    orthography: OrthographySpec


class WordsRequest(BaseModel):
    number: str


@router.post("/encode")
def encode_number(req: EncodeRequest):
    try:
        n = from_decimal_string(req.number)
        tokens = encode(n, req.orthography)
    except ArithmeticTaskError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return {
        "number": n.to_decimal_string(),
        "orthography": req.orthography.label,
        "tokens": list(tokens.tokens),
        "wire": tokens.wire,
    }


@router.post("/decode")
def decode_tokens(req: DecodeRequest):
    """Strict decode; malformed input answers 400 with the reason code."""
    try:
        n = decode(TokenSequence.from_wire(req.tokens), req.orthography)
    except MalformedSequence as e:
        raise HTTPException(status_code=400, detail={"reason": e.reason.name, "message": str(e)})
    return {"number": n.to_decimal_string(), "orthography": req.orthography.label}


@router.post("/words")
def spell_number(req: WordsRequest):
    try:
        words = number_to_words(from_decimal_string(req.number))
    except ArithmeticTaskError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return {"number": req.number, "words": words.wire}


@router.get("/position-token/{exponent}")
def get_position_token(exponent: int):
    if exponent < 0:
        raise HTTPException(status_code=400, detail="exponent must be >= 0")
    return {"exponent": exponent, "token": position_token(exponent)}
